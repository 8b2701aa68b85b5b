"""
PhiGamma - Configuration and Settings Module

This module loads environment variables and defines the kernel settings.
It serves as a central place for defaults shared by the services and the CLI.
"""
import os
from pathlib import Path

import sympy
from dotenv import load_dotenv

# Load environment variables from .env file
# Find the .env file - look in the project root directory
env_path = Path(__file__).resolve().parent.parent / '.env'
load_dotenv(dotenv_path=env_path)

# Arithmetic defaults
DEFAULT_PRIME = int(os.getenv("DEFAULT_PRIME", "3"))
DEFAULT_PRECISION = int(os.getenv("DEFAULT_PRECISION", "6"))
DEFAULT_SERIES_WIDTH = int(os.getenv("DEFAULT_SERIES_WIDTH", "32"))

# Group defaults
DEFAULT_GROUP = os.getenv("DEFAULT_GROUP", "GL3")
DEFAULT_LEVEL = int(os.getenv("DEFAULT_LEVEL", "2"))
DEFAULT_DIST_LEVEL = int(os.getenv("DEFAULT_DIST_LEVEL", "8"))
SUPPORTED_GROUPS = ("GL2", "GL3")

# Solver limits
MAX_NEUMANN_TERMS = int(os.getenv("MAX_NEUMANN_TERMS", "256"))
MAX_SATURATION_SIZE = int(os.getenv("MAX_SATURATION_SIZE", "200000"))

# Self-test settings
DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", "7"))
SELFTEST_CASES = int(os.getenv("SELFTEST_CASES", "10"))
SELFTEST_PROGRESS = os.getenv("SELFTEST_PROGRESS", "true").lower() == "true"

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Cache settings
ENABLE_CACHE = os.getenv("ENABLE_CACHE", "true").lower() == "true"
CACHE_SIZE = int(os.getenv("CACHE_SIZE", "4096"))

# Fixture format
FIXTURE_VERSION = int(os.getenv("FIXTURE_VERSION", "1"))


def verify_settings():
    """Verify that the numeric settings describe a usable configuration."""
    problems = []
    if not sympy.isprime(DEFAULT_PRIME):
        problems.append("DEFAULT_PRIME")
    for name in ("DEFAULT_PRECISION", "DEFAULT_SERIES_WIDTH", "DEFAULT_LEVEL",
                 "DEFAULT_DIST_LEVEL", "MAX_NEUMANN_TERMS", "MAX_SATURATION_SIZE",
                 "CACHE_SIZE", "SELFTEST_CASES"):
        if globals()[name] < 1:
            problems.append(name)
    if DEFAULT_GROUP not in SUPPORTED_GROUPS:
        problems.append("DEFAULT_GROUP")

    if problems:
        raise EnvironmentError(
            f"Invalid settings: {', '.join(problems)}. "
            f"Please check your .env file or environment variables."
        )


# Call verification function when module is imported
verify_settings()
