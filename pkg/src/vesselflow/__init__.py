"""vesselflow: 2D finite-volume blood flow in compliant vessels with
arbitrary cross sections, using a well-balanced positivity-preserving
central-upwind scheme.
"""

__version__ = "0.1.0"

from .errors import (ClosureSingularityError, CollapsedVesselError, ConfigError,
                     GeometryError, HyperbolicityError, NumericError,
                     VesselflowError)
from .geometry import (GridSpec, PhysicalConstants, VesselGeometry,
                       area_from_radius, build_scenario_geometry,
                       gamma_parameter, radius_from_area)
from .closures import ClosureSet, PressureState, coriolis, pressure
from .eigensystem import WaveSpeeds, cardano_discriminant, hyperbolicity_sufficient, wave_speeds
from .scheme import (Boundaries, ConservedField, NumericsConfig, cfl_dt,
                     minmod3, rhs, step_ssp_rk2)
from .scenarios import (InletWaveform, OutputPlan, PerturbationSpec,
                        ScenarioConfig, initial_condition, inlet_velocity,
                        scenario_preset, steady_diagnostics)
from .postprocess import SurfaceSample, surface_velocity_field, tangential_velocity

__all__ = [name for name in dir() if not name.startswith("_")]
