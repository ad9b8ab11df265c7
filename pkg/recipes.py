"""
JSON recipes for atomic sets: {"variant": name, "params": {...}, "parts": [...]}.
"""
import json
import os
import traceback
from typing import Any, Dict, Union

from atomsets import AtomicSet, VariantRegistry
from errors import AtomkitError, UsageError
from logger import logger


def parse_recipe(data: Union[str, Dict[str, Any]]) -> AtomicSet:
    """Build an atomic set from a recipe object or its JSON text."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise UsageError(f"Recipe is not valid JSON: {e}") from e
    return VariantRegistry.build(data)


def dump_recipe(desc: AtomicSet) -> Dict[str, Any]:
    return desc.to_dict()


def recipe_text(desc: AtomicSet) -> str:
    return json.dumps(dump_recipe(desc), sort_keys=True)


def load_recipe(filename: str) -> AtomicSet:
    """Load a recipe file."""
    try:
        if not os.path.exists(filename):
            raise UsageError(f"Recipe file not found: {filename}")
        with open(filename, 'r') as f:
            data = json.load(f)
        desc = parse_recipe(data)
        logger.info(f"Loaded {desc.variant} recipe from {filename}")
        return desc
    except AtomkitError:
        raise
    except Exception as e:
        logger.error(f"Error loading recipe: {str(e)}")
        logger.error(traceback.format_exc())
        raise UsageError(f"Could not load recipe {filename}: {e}")


def save_recipe(desc: AtomicSet, filename: str) -> None:
    with open(filename, 'w') as f:
        json.dump(dump_recipe(desc), f, indent=2, sort_keys=True)
