"""Problem registry: look up problem implementations by name.

Built-in problems are registered lazily on first access; custom problems
can be added at runtime with :meth:`ProblemRegistry.register`.
"""

from __future__ import annotations

from typing import Type

from loguru import logger

from gpinn.problems.base import BaseProblem


class ProblemRegistry:
    """Registry mapping problem names to BaseProblem subclasses.

    Usage:
        problem = problem_registry.create("heat", spec=HeatProblemSpec())
    """

    def __init__(self) -> None:
        self._registry: dict[str, Type[BaseProblem]] = {}
        self._loaded = False

    def _load_builtins(self) -> None:
        """Lazily load the built-in problems."""
        if self._loaded:
            return

        from gpinn.problems.elasticity import ElasticityProblem
        from gpinn.problems.heat import HeatProblem

        self._registry.setdefault("heat", HeatProblem)
        self._registry.setdefault("elasticity", ElasticityProblem)
        self._loaded = True
        logger.debug("Loaded built-in problems")

    def register(self, name: str, cls: Type[BaseProblem]) -> None:
        """Register a custom problem class.

        Args:
            name: The lookup name (e.g., "wave").
            cls: The problem class (must be a subclass of BaseProblem).

        Raises:
            TypeError: If ``cls`` is not a BaseProblem subclass.
        """
        if not issubclass(cls, BaseProblem):
            raise TypeError(f"{cls} is not a subclass of BaseProblem")
        self._registry[name] = cls
        logger.debug(f"Registered custom problem: {name}")

    def get(self, name: str) -> Type[BaseProblem]:
        """Get a problem class by name.

        Args:
            name: The problem name (e.g., "heat", "elasticity").

        Returns:
            The problem class.

        Raises:
            KeyError: If no problem is registered under ``name``.
        """
        self._load_builtins()
        if name not in self._registry:
            available = ", ".join(sorted(self._registry))
            raise KeyError(f"No problem registered for '{name}'. Available: {available}")
        return self._registry[name]

    def create(self, name: str, **kwargs) -> BaseProblem:
        """Create a problem instance by name.

        Args:
            name: The problem name.
            **kwargs: Arguments passed to the problem constructor (e.g. ``spec``).

        Returns:
            A new problem instance.
        """
        return self.get(name)(**kwargs)

    @property
    def available(self) -> list[str]:
        """Sorted names of all registered problems."""
        self._load_builtins()
        return sorted(self._registry)


problem_registry = ProblemRegistry()
