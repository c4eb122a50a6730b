"""Hamilton-Jacobi equations on embedded networks: python bindings."""

try:
    from hjnet._hjnet import *  # noqa: F401,F403  (wheel layout)
except ImportError:  # build-tree layout: extension next to the package
    from _hjnet import *  # noqa: F401,F403

__all__ = ["Model", "running_min", "run_scenario", "HjnetError"]
