"""Training-free toolkit for quadruped locomotion over stairs and rough ground.

Gait phase clock, swing-height splines, tile-based stair terrain, robot
heightmaps and hole filling, reward suites, a scripted rollout harness,
curriculum metrics and a command-line front end.
"""

__version__ = "0.1.0"
