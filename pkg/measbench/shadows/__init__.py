"""Classical shadows (QWC, Clifford, Majorana frames) and derandomized QWC measurement."""

from measbench.shadows.clifford import (
    is_symplectic,
    num_symplectics,
    random_symplectic,
    symplectic_from_index,
)
from measbench.shadows.derandomize import (
    DerandomizationResult,
    derandomize,
    derandomized_plan,
    frames_to_plan,
)
from measbench.shadows.estimators import (
    ShadowEstimate,
    ShadowScheme,
    one_shot_variance,
    simulate_shadow_estimate,
)
from measbench.shadows.frames import (
    CliffordFrame,
    MajoranaFrame,
    MeasurementFrame,
    PauliArrays,
    QubitwiseFrame,
    coverage_probabilities,
    enumerate_clifford_frames,
    enumerate_frames,
    enumerate_majorana_frames,
    enumerate_qwc_frames,
    frame_space_size,
    majorana_pair_probability,
    sample_clifford_frame,
    sample_frame,
    sample_majorana_frame,
    sample_qwc_frame,
)
