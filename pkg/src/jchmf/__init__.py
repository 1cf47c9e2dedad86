"""Mean-field phase diagrams of a microwave-cavity lattice with weakly
anharmonic three-level qubits: exact on-site spectra, Mott lobe boundaries,
and order-parameter/density sweeps with CSV/JSON/SVG output."""

from .config import AxisSpec, ConfigError, RunConfig, load_config, parse_config
from .lobes import LobeBoundary, LobeCrossing, LobeDiagram, lobe_boundary, lobe_diagram
from .meanfield import (
    BracketAtBoundary,
    DegeneracyWarning,
    MeanFieldMatrixSpec,
    MeanFieldSolution,
    SearchConfig,
    TruncationNotConverged,
    TruncationTooSmall,
    build_mf_matrix,
    converge_truncation,
    density,
    ground_energy,
    minimize_psi,
)
from .model import (
    BasisState,
    ModelParams,
    QubitLevel,
    TruncatedBasis,
    excitation_number,
    validate,
)
from .onsite_spectrum import (
    SectorSpectrum,
    SectorTooSmall,
    sector_matrix,
    sector_spectrum,
    single_excitation_nonlinearity,
    spectrum_vs_anharmonicity,
)
from .sweep import SweepRecord, sweep_lobes, sweep_phase, sweep_spectrum

__version__ = "0.1.0"
