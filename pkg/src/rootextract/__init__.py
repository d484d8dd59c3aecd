"""Root-system graph extraction from segmented 3D scans.

Stage one grows a gap-tolerant shortest-path field from the shoot and keeps
the connected root volume; stage two skeletonizes it into a tree of nodes.
Graphs can be scored against references with a distance-tolerant F1.
"""

from .costmap import ExtractionConfig
from .evaluate import EvalReport, score
from .graph import RootGraph, RootNode
from .pipeline import PipelineResult, auto_start, run_pipeline
from .rootgraph_io import read_graph, write_graph
from .volume import Volume, read_volume, write_volume

__all__ = [
    "EvalReport",
    "ExtractionConfig",
    "PipelineResult",
    "RootGraph",
    "RootNode",
    "Volume",
    "auto_start",
    "read_graph",
    "read_volume",
    "run_pipeline",
    "score",
    "write_graph",
    "write_volume",
]

__version__ = "0.1.0"
