"""
Configuration settings for the Sinkhorn flow toolkit
"""
import logging
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class Config:
    # Output
    OUTPUT_DIR = os.getenv('OUTPUT_DIR', 'reports')
    CSV_SIGNIFICANT_DIGITS = 17

    # Solver defaults (h = 1 is the classical Sinkhorn iteration)
    STEP_SIZE = float(os.getenv('STEP_SIZE', '1.0'))
    TOLERANCE = float(os.getenv('TOLERANCE', '1e-9'))
    MAX_ITER = int(os.getenv('MAX_ITER', '10000'))
    SOLVER_MODE = os.getenv('SOLVER_MODE', 'log')  # log, scaling
    DIVERGENCE_FACTOR = 1e6

    # Problem validation
    MASS_TOLERANCE = 1e-12  # relative

    # Heat kernel on the flat torus
    TORUS_IMAGE_COUNT = int(os.getenv('TORUS_IMAGE_COUNT', '5'))

    # Stability scan
    GOLDEN_SECTION_TOL = 1e-4

    # Bridge evaluation grid
    GRID_PADDING_WIDTHS = 6  # in units of sqrt(2 * epsilon)
    GRID_CELLS = int(os.getenv('GRID_CELLS', '400'))

    # CLI
    SWEEP_WORKERS = int(os.getenv('SWEEP_WORKERS', '1'))
    BEURLING_TRIALS = int(os.getenv('BEURLING_TRIALS', '2'))

    # Logging
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('LOG_FILE', '')


def configure_logging(level: str = None, log_file: str = None) -> None:
    """Attach console and file handlers to the root logger"""
    level = level or Config.LOG_LEVEL
    log_file = Config.LOG_FILE if log_file is None else log_file

    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))

    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        handlers=handlers,
        force=True,
    )
