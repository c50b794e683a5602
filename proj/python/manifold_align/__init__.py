"""Spectral manifold alignment of simulated double-pendulum datasets."""

from ._core import (
    AlignmentResult,
    CorrespondenceSet,
    Dataset,
    DegenerateInput,
    DisconnectedGraph,
    Error,
    InvalidArgument,
    IoError,
    NumericalRank,
    PendulumConfig,
    Transform,
    Unconstrained,
    Unsupported,
    __version__,
    add_noise,
    align,
    feature_vector,
    forward_kinematics,
    generate_dataset,
    grid_pairing,
    map_out_of_sample,
    normalized_distances,
    procrustes_fit,
    select_correspondences,
    summarize,
)

METHODS = ("procrustes", "local_laplacian", "local_weights", "global_distance")
LEVELS = ("instance", "feature")


def evaluate(result, pairing, exact=False, seed=0):
    """Delta and sigma of an alignment over a one-to-one pairing."""
    return summarize(normalized_distances(result.sx, result.sy, pairing, exact, seed))
