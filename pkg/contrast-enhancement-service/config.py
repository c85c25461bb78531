"""
Configuration management for the OST contrast enhancement simulator
Handles environment variables, .env files and run-config files
"""

import os
import logging
from typing import Dict, Optional, Tuple
from pathlib import Path

from dotenv import dotenv_values, load_dotenv

logger = logging.getLogger(__name__)


class Config:
    """Configuration class for the enhancement service and CLI"""

    # Enhancement defaults
    LAMBDA_E: float = float(os.getenv("LAMBDA_E", "0.4"))
    JND: float = float(os.getenv("JND", "2.3"))
    BLUR_KERNEL: int = int(os.getenv("BLUR_KERNEL", "3"))
    BLUR_SIGMA: float = float(os.getenv("BLUR_SIGMA", "1.5"))
    ATTENUATION: float = float(os.getenv("ATTENUATION", "0.6"))
    FOV: str = os.getenv("FOV", "0.65,0.65,0.13,0.17")
    METHOD: str = os.getenv("METHOD", "ours")

    # Subtraction compensation
    SUBTRACT_K_V: float = float(os.getenv("SUBTRACT_K_V", "1.0"))
    SUBTRACT_K_B: float = float(os.getenv("SUBTRACT_K_B", "0.4"))

    # Performance
    WORKERS: int = int(os.getenv("WORKERS", "1"))

    # Service Host and Port
    SERVICE_HOST: str = os.getenv("SERVICE_HOST", "0.0.0.0")
    SERVICE_PORT: int = int(os.getenv("SERVICE_PORT", "8010"))

    # Image Processing
    MAX_IMAGE_DIMENSION: int = int(os.getenv("MAX_IMAGE_DIMENSION", "4096"))

    # Logging Configuration
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FORMAT: str = os.getenv("LOG_FORMAT", "%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    @classmethod
    def load_env_file(cls, env_path: str = ".env"):
        """Load environment variables from a .env file and refresh the class defaults"""
        env_file = Path(env_path)
        if not env_file.exists():
            logger.debug(f"Environment file {env_path} not found")
            return
        logger.info(f"Loading environment variables from {env_path}")
        load_dotenv(env_file, override=True)
        cls.refresh()

    @classmethod
    def refresh(cls):
        """Re-read every setting from the environment"""
        cls.LAMBDA_E = float(os.getenv("LAMBDA_E", str(cls.LAMBDA_E)))
        cls.JND = float(os.getenv("JND", str(cls.JND)))
        cls.BLUR_KERNEL = int(os.getenv("BLUR_KERNEL", str(cls.BLUR_KERNEL)))
        cls.BLUR_SIGMA = float(os.getenv("BLUR_SIGMA", str(cls.BLUR_SIGMA)))
        cls.ATTENUATION = float(os.getenv("ATTENUATION", str(cls.ATTENUATION)))
        cls.FOV = os.getenv("FOV", cls.FOV)
        cls.METHOD = os.getenv("METHOD", cls.METHOD)
        cls.SUBTRACT_K_V = float(os.getenv("SUBTRACT_K_V", str(cls.SUBTRACT_K_V)))
        cls.SUBTRACT_K_B = float(os.getenv("SUBTRACT_K_B", str(cls.SUBTRACT_K_B)))
        cls.WORKERS = int(os.getenv("WORKERS", str(cls.WORKERS)))
        cls.SERVICE_HOST = os.getenv("SERVICE_HOST", cls.SERVICE_HOST)
        cls.SERVICE_PORT = int(os.getenv("SERVICE_PORT", str(cls.SERVICE_PORT)))
        cls.MAX_IMAGE_DIMENSION = int(os.getenv("MAX_IMAGE_DIMENSION", str(cls.MAX_IMAGE_DIMENSION)))
        cls.LOG_LEVEL = os.getenv("LOG_LEVEL", cls.LOG_LEVEL)
        cls.LOG_FORMAT = os.getenv("LOG_FORMAT", cls.LOG_FORMAT)

    @classmethod
    def setup_logging(cls, level: Optional[str] = None):
        """Setup logging configuration"""
        logging.basicConfig(
            level=getattr(logging, (level or cls.LOG_LEVEL).upper(), logging.INFO),
            format=cls.LOG_FORMAT,
            force=True,
        )

    @classmethod
    def fov_tuple(cls) -> Tuple[float, float, float, float]:
        """Parse the FOV setting into (s_u, s_v, b_u, b_v)"""
        return parse_fov(cls.FOV)

    @classmethod
    def validate_config(cls) -> bool:
        """Validate the configuration"""
        issues = []

        if not 0.0 <= cls.LAMBDA_E <= 2.0:
            issues.append(f"LAMBDA_E must lie in [0, 2], got {cls.LAMBDA_E}")
        if cls.JND < 0:
            issues.append(f"JND must be non-negative, got {cls.JND}")
        if cls.BLUR_KERNEL < 1 or cls.BLUR_KERNEL % 2 == 0:
            issues.append(f"BLUR_KERNEL must be an odd positive integer, got {cls.BLUR_KERNEL}")
        if cls.BLUR_SIGMA <= 0:
            issues.append(f"BLUR_SIGMA must be positive, got {cls.BLUR_SIGMA}")
        if not 0.0 <= cls.ATTENUATION <= 1.0:
            issues.append(f"ATTENUATION must lie in [0, 1], got {cls.ATTENUATION}")
        try:
            s_u, s_v, _, _ = parse_fov(cls.FOV)
            if s_u <= 0 or s_v <= 0:
                issues.append(f"FOV scale factors must be positive, got {cls.FOV}")
        except ValueError as e:
            issues.append(str(e))
        if cls.WORKERS < 1:
            issues.append(f"WORKERS must be at least 1, got {cls.WORKERS}")

        if issues:
            logger.error("Configuration validation failed:")
            for issue in issues:
                logger.error(f"  - {issue}")
            return False

        logger.info("Configuration validation passed")
        return True


def parse_fov(text: str) -> Tuple[float, float, float, float]:
    """Parse "SU,SV,BU,BV" into four floats"""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 4:
        raise ValueError(f"FOV needs four comma-separated values SU,SV,BU,BV, got '{text}'")
    try:
        s_u, s_v, b_u, b_v = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"FOV values must be numbers, got '{text}'")
    return s_u, s_v, b_u, b_v


def read_run_config_file(path: str) -> Dict[str, str]:
    """
    Read a plain-text KEY=VALUE run-config file

    Keys are normalized to lower case with dashes turned into underscores, so
    both LAMBDA_E=0.4 and lambda-e=0.4 are accepted.
    """
    config_file = Path(path)
    if not config_file.is_file():
        raise FileNotFoundError(f"Run-config file not found: {path}")

    values = dotenv_values(config_file)
    settings = {}
    for key, value in values.items():
        if value is None:
            continue
        settings[key.strip().lower().replace("-", "_")] = value.strip()
    logger.info(f"Loaded {len(settings)} settings from {path}")
    return settings


# Initialize configuration
config = Config()

# Load .env file if it exists
config.load_env_file()
