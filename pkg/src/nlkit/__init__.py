"""Bell nonlocality as a device-independent key resource.

Distribution tuples, the local polytope, resource-theory wirings, the CHSH
monotone, closed-form DIQKD rate bounds, two-qubit Born-rule models and a
seeded raw-key protocol simulator.
"""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    EnumerationCapError,
    NlkitError,
    ShapeError,
    SolverError,
    UnsupportedScenarioError,
)
from .monotones import (
    BellFunctional,
    bell_value,
    chsh_functional,
    chsh_measure,
    chsh_value,
    monotonicity_probe,
    select_inputs,
)
from .polytope import (
    DeterministicVertex,
    LocalDecomposition,
    NonlocalVerdict,
    enumerate_vertices,
    is_local,
    local_fraction,
)
from .protocols import ProtocolSpec, SimResult, run_lemma_protocol, run_protocol, sample_round
from .quantum import TwoQubitModel, born_tuple, make_paper_model
from .rates import (
    RateReport,
    binary_entropy,
    eve_bound,
    g,
    g_prime,
    mutual_information_binary,
    r,
    r0_theta_bound,
    rate_report,
    threshold,
)
from .scenario import (
    BellScenario,
    DistributionTuple,
    chsh_scenario,
    correlator,
    make_theta_family,
    pr_box,
    uniform_tuple,
    validate,
)
from .transforms import (
    OrderCertificate,
    OrderInfeasible,
    Wiring,
    apply_elementary,
    apply_wiring,
    check_order,
    enumerate_wirings,
    mix_with_local,
)
