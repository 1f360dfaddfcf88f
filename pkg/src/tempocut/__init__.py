"""Sparsest and normalized cuts on temporal graphs via multiplex spectral relaxations."""

__version__ = "0.1.0"

from .baselines import lap_baseline, single_baseline, union_baseline
from .cuts import (
    CutReport,
    TemporalCut,
    clc_relax,
    kway_cut,
    normalized_temporal_sparsity,
    relaxation_bound,
    shift_constant,
    stc_relax,
    sweep_round,
    temporal_sparsity,
)
from .datasets import drift_cuts, load_drift
from .eigen import EigenConfig, SpectrumResult, cg_solve, dense_sym_eig, extreme_eigs, smallest_generalized
from .estimators import DynamicWaveletCompressor, GraphFourierCompressor, TemporalCutEstimator
from .exceptions import *  # noqa: F401,F403
from .formats import read_graph, read_labels, read_signal, write_graph, write_labels, write_signal
from .fstc import QMatrix, SnapshotSpectrum, assemble_q, fstc_cut, fstc_error_bound, snapshot_spectrum
from .graph import (
    MultiplexParams,
    MultiplexView,
    SpectralOperator,
    TemporalGraph,
    c_operator,
    degree_vector,
    multiplex_laplacian,
    normalized_operator,
    validate,
)
from .oracle import brute_force_optimal, kway_metrics, partition_agreement
from .synth import SynthConfig, generate
from .wavelets import (
    PartitionTree,
    SignalSeries,
    best_wavelet_cut,
    compress,
    csc_operator,
    dynamic_wavelet_energy,
    graph_fourier_compress,
    heat_signal,
    reconstruct,
    static_wavelet_energy,
)
