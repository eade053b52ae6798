"""
Runtime configuration for mlleak.

Provides module-level settings (root seed, parallelism, training profile)
with environment-variable defaults, mirroring how a single process-wide
configuration is shared by the library and the command-line runner.
"""

import os
from dataclasses import dataclass, replace
from typing import Optional

from .exceptions import MLLeakConfigurationError


@dataclass
class TrainProfile:
    """
    Epoch budgets applied when an experiment does not pin them explicitly.

    Attributes:
        epochs: Target and shadow model training epochs
        attack_epochs: Attack classifier training epochs
    """

    epochs: int
    attack_epochs: int


_DEFAULT_PROFILES: dict[str, TrainProfile] = {
    "paper-faithful": TrainProfile(epochs=100, attack_epochs=50),
    "fast": TrainProfile(epochs=15, attack_epochs=30),
}


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise MLLeakConfigurationError(
            f"{name} must be an integer, got {raw!r}"
        ) from e


# Module-level configuration
_root_seed: int = _env_int("MLLEAK_SEED", 0)
_jobs: int = _env_int("MLLEAK_JOBS", 1)
_profile: str = os.getenv("MLLEAK_PROFILE", "fast")
_profiles: dict[str, TrainProfile] = {
    name: replace(profile) for name, profile in _DEFAULT_PROFILES.items()
}


def set_root_seed(seed: int) -> None:
    """
    Set the root seed every component seed is derived from.

    Args:
        seed: Unsigned 64-bit seed

    Example:
        >>> import mlleak
        >>> mlleak.set_root_seed(1234)
    """
    global _root_seed
    if not 0 <= seed < 2**64:
        raise MLLeakConfigurationError(f"Root seed must fit in 64 unsigned bits, got {seed}")
    _root_seed = seed


def set_jobs(jobs: int) -> None:
    """
    Set the maximum number of grid cells executed in parallel.

    Args:
        jobs: Worker count (1 runs everything in-process)
    """
    global _jobs
    if jobs < 1:
        raise MLLeakConfigurationError(f"jobs must be >= 1, got {jobs}")
    _jobs = jobs


def set_profile(name: str) -> None:
    """
    Select the training profile.

    Args:
        name: "fast" or "paper-faithful"

    Example:
        >>> import mlleak
        >>> mlleak.set_profile("paper-faithful")
    """
    global _profile
    if name not in _profiles:
        raise MLLeakConfigurationError(
            f"Unknown profile {name!r}; expected one of {sorted(_profiles)}"
        )
    _profile = name


def configure_profile(
    name: str,
    epochs: Optional[int] = None,
    attack_epochs: Optional[int] = None,
) -> None:
    """
    Adjust the epoch budgets of a built-in profile.

    Args:
        name: Profile to edit
        epochs: Target/shadow training epochs
        attack_epochs: Attack classifier training epochs

    Example:
        >>> import mlleak
        >>> # Shorter runs for a smoke test
        >>> mlleak.configure_profile("fast", epochs=5, attack_epochs=10)
    """
    if name not in _profiles:
        raise MLLeakConfigurationError(f"Unknown profile {name!r}")
    profile = _profiles[name]

    # Update only the specified fields
    if epochs is not None:
        profile.epochs = epochs
    if attack_epochs is not None:
        profile.attack_epochs = attack_epochs


def get_root_seed() -> int:
    """
    Get the current root seed.

    Returns:
        The configured root seed
    """
    return _root_seed


def get_jobs() -> int:
    """
    Get the configured parallelism.

    Returns:
        Maximum number of concurrent grid jobs
    """
    return _jobs


def get_profile() -> str:
    """
    Get the name of the active training profile.

    Returns:
        The active profile name

    Raises:
        MLLeakConfigurationError: If MLLEAK_PROFILE named an unknown profile
    """
    if _profile not in _profiles:
        raise MLLeakConfigurationError(
            f"Unknown profile {_profile!r}. Call set_profile() or fix MLLEAK_PROFILE."
        )
    return _profile


def get_train_profile(name: Optional[str] = None) -> TrainProfile:
    """
    Get the epoch budgets of a profile.

    Args:
        name: Profile name (defaults to the active profile)

    Returns:
        The TrainProfile instance
    """
    name = name or get_profile()
    if name not in _profiles:
        raise MLLeakConfigurationError(f"Unknown profile {name!r}")
    return _profiles[name]
