from .diagrams import (DiagramPoint, PersistenceDiagram, bottleneck_distance,
                       bottleneck_points, render_svg, window_query)
from .modules import (FilteredMap, RankFunction, critical_values, diagram_from_ranks,
                      evaluation_values, kernel_cokernel_diagrams, module_diagrams,
                      module_rank_functions, module_ranks)
from .reduction import reduction_diagram
from .z2 import Z2Basis, nullspace_combinations, reduce_columns, z2_rank

__all__ = [
    "DiagramPoint", "PersistenceDiagram", "bottleneck_distance", "bottleneck_points",
    "render_svg", "window_query", "FilteredMap", "RankFunction", "critical_values",
    "diagram_from_ranks", "evaluation_values", "kernel_cokernel_diagrams",
    "module_diagrams", "module_rank_functions", "module_ranks", "reduction_diagram",
    "Z2Basis", "nullspace_combinations", "reduce_columns", "z2_rank",
]
