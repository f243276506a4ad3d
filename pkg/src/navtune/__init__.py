"""navtune: a deterministic 2D navigation stack and tuning workbench.

Layered costmaps, a Dijkstra/A* global planner with the classic cost
transform, a DWA local planner, recovery behaviors, a differential-drive
simulator and a live parameter registry, all desk-scale and fully
reproducible.
"""

__version__ = "0.1.0"
