"""Regional pole placement (D-stability) certification and synthesis for
networked linear systems, with a DC-microgrid application layer."""

__version__ = "0.1.0"

from .cpoly import (
    CPoly,
    CRational,
    RealRationalMatrix2x2,
    feedback,
    real_equiv,
    reduce,
    residue_at,
    roots,
    rotate,
    substitute_affine,
)
from .devices import (
    ComplianceReport,
    CplParams,
    Equilibrium,
    EssBoostParams,
    EssBuckParams,
    GenericSecondOrder,
    PvParams,
    bound_hs,
    bound_lhp,
    bound_sector,
    check_compliance,
    coeffs_ess_boost,
    coeffs_ess_buck,
    coeffs_pv,
    cpl_tf,
    equilibrium_solve,
    modified_cpl,
    modified_source,
    rotated_source,
    virtual_admittance,
)
from .dstability import (
    CertificationReport,
    SystemModel,
    assemble_closed_loop,
    certify_thm1,
    certify_thm2,
    closed_loop_poles,
    verify_region,
)
from .network import (
    AdmittanceMatrix,
    GridCode,
    NodePartition,
    build_admittance,
    check_rotated_psd,
    grid_code,
    rotate_network,
    schur_xi,
)
from .positivity import (
    FailedCondition,
    PositivityReport,
    check_positive_matrix_sampled,
    check_positive_second_order,
    check_positive_siso,
    check_pr_real_matrix,
    complex_routh_hurwitz_quadratic,
    nyquist_disk_check,
)
from .regions import (
    CompositeRegion,
    HalfPlaneRegion,
    contains,
    horizontal_strip,
    map_to_nu,
    map_to_s,
    sector,
    shifted_lhp,
)
from .scenario import Scenario, build_model, data_path, load_scenario
from .sim import DisturbanceSpec, Trajectory, metrics, simulate
