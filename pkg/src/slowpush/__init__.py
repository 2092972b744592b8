"""Asteroid impact-corridor mapping and slow-push deflection analysis.

Propagates a near-Earth asteroid through a perturbed solar system to
Earth contact, scans the along-track uncertainty into a ground
corridor, carries orbit-determination covariance to a surface
ellipse, sweeps ion-beam push durations into impact-point walks, and
scores the outcomes on population and nightlight rasters.
"""

__version__ = "0.1.0"

from .budget import (
    DeflectionPropellant,
    PropulsionConfig,
    ThrustArc,
    ThrustSchedule,
    deflection_propellant,
    load_r_profile,
    load_schedule,
    mass_history,
    thrust_at,
    write_mass_history,
)
from .deflection import (
    AsteroidBody,
    DeflectionEntry,
    DeflectionTrack,
    ThrustLaw,
    deflection_sweep,
    displacement_vs_duration,
    initial_bearing_deg,
    thrust_acceleration,
)
from .dispersion import (
    CovarianceMatrix,
    FrenetFrame,
    SurfaceEllipse,
    impact_ellipse,
    propagate_covariance,
    rendezvous_covariance,
    state_transition,
)
from .dynamics import (
    DEFAULT_INTEGRATOR,
    ForceModelConfig,
    IntegratorConfig,
    Trajectory,
    acceleration,
    find_event,
    propagate,
)
from .elements import (
    CONVENTION_STANDARD,
    CONVENTION_SWAPPED,
    FRAME_J2000,
    FRAME_OF_DATE,
    EquinoctialElements,
    StateVector,
    cartesian_to_equinoctial,
    equinoctial_to_cartesian,
    solve_eccentric_longitude,
    state_from_elements,
)
from .ephemeris import (
    AnalyticEphemeris,
    Body,
    TabulatedEphemeris,
    body_state,
    load_ephemeris_table,
)
from .errors import (
    ChainedInputError,
    CloseEncounterError,
    ConditioningError,
    ConfigError,
    ConvergenceError,
    CoverageError,
    DomainError,
    FormatError,
    JacobianStepError,
    PropellantError,
    RangeError,
    ReanchorError,
    SlowpushError,
    StepSizeError,
)
from .exposure import (
    DamageIndexes,
    GeoRaster,
    damage_indexes,
    disc_integral,
    load_nightlight,
    load_population_grid,
    score_track,
)
from .impact import (
    ImpactRecord,
    MissRecord,
    RiskPath,
    great_circle_km,
    impact_from_elements,
    impact_from_state,
    reanchor_epoch,
    risk_path,
)
from .timeframes import (
    Epoch,
    GeodeticPoint,
    earth_rotation_angle,
    ecef_to_geodetic,
    geodetic_to_ecef,
    tdb_to_utc,
    utc_to_tdb,
)

__all__ = [name for name in dir() if not name.startswith("_")]
