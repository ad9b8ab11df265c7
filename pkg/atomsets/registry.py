"""
Variant registry for rebuilding atomic sets from recipes.
"""
from typing import Any, Dict, Optional, Type

from atomsets.base import AtomicSet
from errors import UsageError


class VariantRegistry:
    """Registry for atomic-set variants, keyed by their `variant` name."""

    _instance = None
    _variants: Dict[str, Type[AtomicSet]] = {}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(VariantRegistry, cls).__new__(cls)
        return cls._instance

    @classmethod
    def register(cls, variant_type: Type[AtomicSet]) -> Type[AtomicSet]:
        """Register a variant type."""
        cls._variants[variant_type.variant] = variant_type
        return variant_type

    @classmethod
    def get(cls, name: str) -> Optional[Type[AtomicSet]]:
        """Get a variant type by name."""
        return cls._variants.get(name)

    @classmethod
    def get_all(cls) -> Dict[str, Type[AtomicSet]]:
        """Get all registered variant types."""
        return cls._variants.copy()

    @classmethod
    def clear(cls) -> None:
        """Clear all registered variant types."""
        cls._variants.clear()

    @classmethod
    def build(cls, recipe: Dict[str, Any]) -> AtomicSet:
        """Build a set from a nested {variant, params, parts} recipe."""
        if not isinstance(recipe, dict) or "variant" not in recipe:
            raise UsageError(f"recipe must be an object with a 'variant' key, got {recipe!r}")
        variant_type = cls.get(recipe["variant"])
        if variant_type is None:
            raise UsageError(f"Unknown variant: {recipe['variant']!r}")
        parts = [cls.build(p) for p in recipe.get("parts", [])]
        try:
            return variant_type.from_params(recipe.get("params", {}), parts)
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"Bad parameters for {recipe['variant']}: {e}") from e
