"""crossview: match egocentric video recorders to viewers in a top-view video.

Per-view graphs (self-similarity matrices plus people-count series on the
nodes, cross matrices on the edges) are compared through the peak of their
mean-normalized cross-correlation; the resulting pairing affinities feed a
spectral soft assignment and a Munkres hard assignment. A seeded scenario
simulator supplies ground truth for end-to-end verification.
"""

from .errors import (CrossviewError, DegenerateAffinityError,
                     DegenerateTrajectoryError, InsufficientOverlapError,
                     InvalidInputError, InvalidProblemError)
from .geometry import (FovSector, GeometryConfig, OrientationSeries,
                       OrientedTrajectory, Trajectory, count_in_fov,
                       estimate_orientation, fov_sector, orient, scene_radius,
                       sector_iou)
from .features import (CountSeries, DetectionSeries, FeatureMatrix,
                       FrameDescriptorSequence, descriptor_similarity,
                       ego_count_series, fov_overlap_matrix, top_count_series)
from .xcorr import XCorrConfig, xcorr1_max, xcorr2_max
from .graph import (AffinityMatrix, GraphNode, ViewGraph, assemble_affinity,
                    build_ego_graph, build_top_graph, dump_affinity_debug,
                    edge_affinity, node_affinity)
from .matching import (AssignmentResult, HardAssignment, RankedCandidate,
                       SoftAssignment, SpectralConfig, baseline_assignment,
                       hard_assignment, leading_eigenvector, match_graphs,
                       node_profit_matrix, rank_top_videos, soft_assignment)
from .evaluation import (SubsetPolicy, SweepRow, assignment_accuracy,
                         cmc_curve, completeness_sweep, ranks_of_truth)
from .simulator import (AppearanceField, Scenario, ScenarioConfig,
                        delayed_ego_views, generate_scenario,
                        render_detections, render_ego_descriptor)
from .config import RunConfig, load_run_config

__version__ = "0.1.0"
