"""Single table of physical and numerical defaults.

Every tunable used by the library is listed here with its unit. Runs echo
the effective values into a sidecar file, and the CLI ``--set key=value``
flag overrides entries by name.
"""

DEFAULTS = {
    # geometry (meters)
    "arena": 8.0,
    "n": 80,
    "agent_radius": 0.2,
    "nav_tolerance": 0.2,
    "agent_speed": 1.0,           # m/s
    "time_base": 0.1,             # seconds per prediction (TMNN) step
    # pedestrians
    "personal_radius": 0.4,       # m
    "reaction_distance": 2.0,     # m
    "crossing_angle": 5.0,        # degrees, half-width of the cooperation cone
    "lateral_gain": 0.5,          # |w| / |v|
    "reaim_after_cooperation": True,
    # lattice
    "coupling": 0.2,
    "recovery_rate": 0.04,
    "dtau": 0.05,
    "substeps": 2,
    "r_agent": 5.0,
    "band_low": 1.0,
    "band_high": 2.0,
    "r_th": 1.5,
    "max_mental_steps": 20000,
    "patience": 300,              # mental steps without a new arrival
    "blowup": 50.0,
    # trajectory predictor
    "tmnn_rate": 1e-2,
    "tmnn_tolerance": 1e-6,
    "tmnn_samples": 200,
    "tmnn_epochs": 60,
    # tracing / execution
    "descent_step": 0.5,          # cells
    "sim_dt": 0.05,               # s
    "sim_time_cap": 60.0,         # s
    "execution_timing": "map",    # "map": follow arrival times, "speed": constant agent_speed
    # metrics
    "d_crt": 0.3,                 # m
}


def merged(overrides=None):
    """Return a copy of the defaults with ``overrides`` applied.

    Unknown keys raise ``KeyError``; values are coerced to the type of the
    default they replace.
    """
    out = dict(DEFAULTS)
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise KeyError(f"unknown parameter {key!r}")
        ref = DEFAULTS[key]
        if isinstance(ref, str):
            out[key] = str(value)
        elif isinstance(ref, bool):
            if isinstance(value, str):
                value = value.strip().lower() in ("1", "true", "yes", "on")
            out[key] = bool(value)
        elif isinstance(ref, int):
            out[key] = int(value)
        else:
            out[key] = float(value)
    return out
