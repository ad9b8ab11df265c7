"""
Unit tests for configuration and logging.
"""
import json
import logging
import os
import tempfile
import unittest

from config import ConfigManager, SEED_ENV_VAR, default_seed
from errors import UsageError
from utils import debug_logger, init_logger, set_log_level


class TestConfigManager(unittest.TestCase):
    """Nested settings with JSON overrides."""

    def setUp(self):
        """Set up each test case."""
        self.config = ConfigManager()

    def test_defaults(self):
        """Defaults are available and unknown keys fall back."""
        self.assertEqual(self.config.get_value("faces", "tol"), 1e-9)
        self.assertEqual(self.config.get_value("faces", "missing", 3), 3)

    def test_set_value(self):
        """Known keys can be set; unknown ones are usage errors."""
        self.config.set_value("solvers", "max_iter", 50)
        self.assertEqual(self.config.get_value("solvers", "max_iter"), 50)
        with self.assertRaises(UsageError):
            self.config.set_value("solvers", "bogus", 1)
        with self.assertRaises(UsageError):
            self.config.set_value("nowhere", "max_iter", 1)

    def test_save_load_reset(self):
        """Overrides persist through JSON and reset restores defaults."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "config.json")
            with open(path, 'w') as f:
                json.dump({"apps": {"demix_size": 32}}, f)
            self.config.load_config(path)
            self.assertEqual(self.config.get_value("apps", "demix_size"), 32)
            self.assertEqual(self.config.get_value("apps", "demix_iters"), 300)
            out = os.path.join(tmp, "saved.json")
            self.config.save_config(out)
            self.assertEqual(ConfigManager.from_dict(json.load(open(out))).to_dict(), self.config.to_dict())
            self.config.reset_config("apps")
            self.assertEqual(self.config.get_value("apps", "demix_size"), 64)
            with self.assertRaises(UsageError):
                self.config.load_config(os.path.join(tmp, "missing.json"))

    def test_seed_override(self):
        """The environment seed overrides the default and must be an integer."""
        old = os.environ.get(SEED_ENV_VAR)
        try:
            os.environ[SEED_ENV_VAR] = "17"
            self.assertEqual(default_seed(), 17)
            os.environ[SEED_ENV_VAR] = "seventeen"
            with self.assertRaises(UsageError):
                default_seed()
            del os.environ[SEED_ENV_VAR]
            self.assertEqual(default_seed(), 0)
        finally:
            if old is not None:
                os.environ[SEED_ENV_VAR] = old


class TestLogger(unittest.TestCase):
    """Singleton toolkit logger."""

    def tearDown(self):
        """Clean up each test case."""
        init_logger(log_level=logging.WARNING)

    def test_levels(self):
        """Levels follow init_logger and set_log_level."""
        log = init_logger(log_level=logging.DEBUG)
        self.assertEqual(log.level, logging.DEBUG)
        set_log_level(logging.ERROR)
        self.assertEqual(log.level, logging.ERROR)
        self.assertIs(log, debug_logger.get_logger())

    def test_file_and_json(self):
        """File logging writes JSON records when asked."""
        with tempfile.TemporaryDirectory() as tmp:
            log = init_logger(log_level=logging.INFO, log_to_file=True, log_dir=tmp,
                              log_file="run.log", json_format=True)
            log.info("hello")
            for handler in log.handlers:
                handler.flush()
            with open(os.path.join(tmp, "run.log")) as f:
                record = json.loads(f.readline())
            self.assertEqual(record["message"], "hello")
            for handler in list(log.handlers):
                handler.close()
            init_logger(log_level=logging.WARNING)


if __name__ == '__main__':
    unittest.main()
