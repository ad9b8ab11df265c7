"""
Toolkit configuration and constants.
"""
import copy
import json
import os
import traceback
from typing import Any, Dict, Optional

from errors import UsageError
from logger import logger

# Linear algebra
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000
DENSE_CUTOFF = 32
SYMMETRY_TOL = 1e-12
ORTHONORMAL_TOL = 1e-8
LANCZOS_BLOCK = 8

# Faces and cones
FACE_TOL = 1e-9
PSD_TOL = 1e-10
RECESSION_TOL = 1e-10
SUBSPACE_TOL = 1e-9
RANK_ONE_ANGLE_TOL = 1e-6
DECOMPOSE_TOL = 1e-12
GROUP_NORM_ITERS = 500
FINITE_PROJECTION_ITERS = 3000

# Set calculus
BISECTION_ITERS = 60
PROJECTION_ITERS = 1000
COLUMN_ROUNDS = 500
COLUMN_SEED_MAX_DIM = 64
SPLIT_TOL = 1e-7
MAX_EXACT_SUM_ATOMS = 5000

# Enumeration limits for the exhaustive gauge
BRUTEFORCE_MAX_ATOMS = 10
BRUTEFORCE_MAX_DIM = 6

# Solvers
CG_MAX_ITER = 1000
CG_RELATIVE_EPS = 1e-6
RECOVERY_ITERS = 2000
RECOVERY_FACE_K = 64
RECOVERY_ROUNDS = 50
RECOVERY_GAP_TOL = 1e-10
RECOVERY_SLACK = 0.05
MOREAU_GOLDEN_ITERS = 80

# Applications
MATCOMP_DENSITY = 0.10
MATCOMP_NOISE = 0.1
MATCOMP_ITERS = 10
RECOVERY_ELL = 4
RANK_ENERGY = 0.9
DEMIX_SIZE = 64
DEMIX_SPARSE_FRAC = 0.02
DEMIX_RANK = 2
DEMIX_DCT_FRAC = 0.02
DEMIX_NOISE_GAUGE = 0.5
DEMIX_TAU_FACTOR = 1.1
DEMIX_ITERS = 300
DEMIX_MAX_COHERENCE = 0.5
DEMIX_MAX_REGENERATE = 100

# Randomness
DEFAULT_SEED = 0
SEED_ENV_VAR = "ATOMKIT_SEED"

# I/O
CSV_FLOAT_FORMAT = "%.17g"


def default_seed() -> int:
    """Seed from the environment override, else the built-in default."""
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")


class ConfigManager:
    """Nested configuration with JSON persistence."""

    def __init__(self):
        """Initialize the configuration manager."""
        self.default_config: Dict[str, Any] = {
            "linalg": {
                "tol": DEFAULT_TOL,
                "max_iter": DEFAULT_MAX_ITER,
                "dense_cutoff": DENSE_CUTOFF,
            },
            "faces": {
                "tol": FACE_TOL,
                "psd_tol": PSD_TOL,
                "group_norm_iters": GROUP_NORM_ITERS,
            },
            "set_calculus": {
                "bisection_iters": BISECTION_ITERS,
                "projection_iters": PROJECTION_ITERS,
                "split_tol": SPLIT_TOL,
                "column_rounds": COLUMN_ROUNDS,
            },
            "solvers": {
                "max_iter": CG_MAX_ITER,
                "relative_eps": CG_RELATIVE_EPS,
                "recovery_iters": RECOVERY_ITERS,
                "recovery_rounds": RECOVERY_ROUNDS,
                "recovery_slack": RECOVERY_SLACK,
            },
            "apps": {
                "matcomp_density": MATCOMP_DENSITY,
                "matcomp_noise": MATCOMP_NOISE,
                "matcomp_iters": MATCOMP_ITERS,
                "ell": RECOVERY_ELL,
                "demix_size": DEMIX_SIZE,
                "demix_iters": DEMIX_ITERS,
                "demix_tau_factor": DEMIX_TAU_FACTOR,
            },
            "logging": {
                "level": "WARNING",
                "json": False,
            },
        }
        self.config: Dict[str, Any] = copy.deepcopy(self.default_config)

    def get_value(self, section: str, key: str, default: Optional[Any] = None) -> Any:
        """Get a configuration value."""
        return self.config.get(section, {}).get(key, default)

    def set_value(self, section: str, key: str, value: Any) -> None:
        """Set a configuration value."""
        if section not in self.config:
            raise UsageError(f"Unknown configuration section: {section}")
        if key not in self.default_config[section]:
            raise UsageError(f"Unknown configuration key: {section}.{key}")
        self.config[section][key] = value
        logger.debug(f"Config {section}.{key} = {value!r}")

    def load_config(self, filename: str) -> None:
        """Load configuration overrides from a JSON file."""
        try:
            if not os.path.exists(filename):
                raise UsageError(f"Configuration file not found: {filename}")
            with open(filename, 'r') as f:
                data = json.load(f)
            loaded = self.from_dict(data)
            self.config = loaded.config
            logger.info(f"Loaded configuration from {filename}")
        except UsageError:
            raise
        except Exception as e:
            logger.error(f"Error loading configuration: {str(e)}")
            logger.error(traceback.format_exc())
            raise UsageError(f"Could not load configuration {filename}: {e}")

    def save_config(self, filename: str) -> None:
        """Save configuration to a JSON file."""
        try:
            with open(filename, 'w') as f:
                json.dump(self.to_dict(), f, indent=4, sort_keys=True)
        except Exception as e:
            logger.error(f"Error saving configuration: {str(e)}")
            logger.error(traceback.format_exc())
            raise UsageError(f"Could not save configuration {filename}: {e}")

    def reset_config(self, section: Optional[str] = None) -> None:
        """Reset one section, or everything, to defaults."""
        if section is None:
            self.config = copy.deepcopy(self.default_config)
        elif section in self.default_config:
            self.config[section] = copy.deepcopy(self.default_config[section])
        else:
            raise UsageError(f"Unknown configuration section: {section}")

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return copy.deepcopy(self.config)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ConfigManager':
        """Create a manager from a (possibly partial) dictionary."""
        manager = cls()
        for section, values in data.items():
            if not isinstance(values, dict):
                raise UsageError(f"Configuration section {section} must be an object")
            for key, value in values.items():
                manager.set_value(section, key, value)
        return manager


settings = ConfigManager()
