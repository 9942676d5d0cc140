"""WKB heat-kernel pricing of European calls under the CEV model."""

from .core import CevParams, FellerParams, MarketSpec, derive_feller_params, feller_to_stock, stock_to_feller
from .errors import (CevWkbError, DegeneratePathError, EndpointReconstructionError, KernelDomainError,
                     LogDomainError, MomentumPoleError, NonPositiveJError, NumericConvergenceError,
                     ParameterDomainError)
from .black_scholes import BsParams, bs_call_closed, bs_call_quadrature, bs_propagator, bs_put_quadrature
from .classical import (EndpointConstants, action, constants_from_endpoints, constants_from_phase,
                        mixed_derivative_integral, path_momentum, path_position, vvm_determinant,
                        vvm_determinant_phase)
from .variational import fundamental_matrix, vvm_via_variational
from .kernel import KernelEval, kernel_closed_form, kernel_mass, wkb_kernel
from .pricing import PriceResult, QuadConfig, cev_call_price, cev_call_price_detailed
from .montecarlo import McConfig, McEstimate, mc_call_price, mc_convergence_curve, simulate_terminal
from .sweep import SweepRow, SweepSpec, read_sweep_csv, run_sweep, write_sweep_csv
from .verify import CheckResult, VerifyReport, run_verify

__version__ = "0.1.0"
