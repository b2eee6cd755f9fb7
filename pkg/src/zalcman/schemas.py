"""Column lists and JSON Schemas for every file the command line writes."""

CSV_COLUMNS = {
    "render.csv": ["re", "im"],
    "similarity.csv": [
        "k", "n_k", "re_rho", "im_rho", "d_H_julia", "d_H_mandelbrot", "d_H_between",
        "re_Q", "im_Q", "re_lambda", "im_lambda", "grid_tolerance", "error",
    ],
    "census.csv": ["j", "k", "l", "re_c", "im_c", "residual", "distance", "misiurewicz", "re_multiplier", "im_multiplier"],
    "poincare.csv": ["re_w", "im_w", "re_phi", "im_phi"],
}

_number = {"type": "number"}
_int = {"type": "integer"}
_str = {"type": "string"}
_bool = {"type": "boolean"}
_nullable_number = {"type": ["number", "null"]}
_nullable_int = {"type": ["integer", "null"]}

RENDER_JSON = {
    "type": "object",
    "required": ["kind", "degree", "re_c", "im_c", "re_center", "im_center", "half_width", "resolution", "cap", "tau",
                 "mode", "marked", "spacing"],
    "properties": {
        "kind": {"enum": ["julia", "mandelbrot"]},
        "degree": _int, "re_c": _number, "im_c": _number, "re_center": _number, "im_center": _number,
        "half_width": _number, "resolution": _int, "cap": _int, "tau": _number,
        "mode": {"enum": ["filled", "boundary"]}, "marked": _int, "spacing": _number,
    },
    "additionalProperties": False,
}

SIMILARITY_JSON = {
    "type": "object",
    "required": ["degree", "re_c0", "im_c0", "l", "p", "re_a0", "im_a0", "re_A0", "im_A0", "re_lambda0", "im_lambda0",
                 "re_lambda", "im_lambda", "re_Q", "im_Q", "r", "resolution", "cap", "tau", "model_depth",
                 "model_depth_gap", "spacing", "grid_tolerance", "rate_slope", "rate_rows"],
    "properties": {
        "degree": _int, "re_c0": _number, "im_c0": _number, "l": _int, "p": _int,
        "re_a0": _number, "im_a0": _number, "re_A0": _number, "im_A0": _number,
        "re_lambda0": _number, "im_lambda0": _number, "re_lambda": _number, "im_lambda": _number,
        "re_Q": _number, "im_Q": _number, "r": _number, "resolution": _int, "cap": _int, "tau": _number,
        "model_depth": _int, "model_depth_gap": _number, "spacing": _number, "grid_tolerance": _number,
        "rate_slope": _nullable_number, "rate_rows": _int,
    },
    "additionalProperties": False,
}

_mm0 = {
    "type": "object",
    "required": ["test", "re_c", "im_c", "re_z0", "im_z0", "r", "d_bound", "n_max", "verdict", "certified",
                 "qualifying", "radius_upper_half", "radius_upper_full"],
    "properties": {
        "test": {"const": "mm0"}, "re_c": _number, "im_c": _number, "re_z0": _number, "im_z0": _number,
        "r": _number, "d_bound": _int, "n_max": _int,
        "verdict": {"enum": ["conical-certified", "conical-heuristic", "not-detected"]},
        "certified": _bool, "qualifying": _int, "radius_upper_half": _number, "radius_upper_full": _number,
    },
    "additionalProperties": False,
}

_lm1 = {
    "type": "object",
    "required": ["test", "re_c", "im_c", "re_z0", "im_z0", "verdict", "heuristic", "failed_radius", "radii",
                 "stabilized_depth"],
    "properties": {
        "test": {"const": "lm1"}, "re_c": _number, "im_c": _number, "re_z0": _number, "im_z0": _number,
        "verdict": {"enum": ["LM1-evidence", "not-stabilized"]}, "heuristic": _bool,
        "failed_radius": _nullable_number, "radii": {"type": "array", "items": _number},
        "stabilized_depth": {"type": "array", "items": _int},
    },
    "additionalProperties": False,
}

_semi = {
    "type": "object",
    "required": ["test", "re_c", "im_c", "horizon", "separation", "semi_hyperbolic", "landing_index", "kappa", "eta",
                 "omega_points", "min_return_distance"],
    "properties": {
        "test": {"const": "semi"}, "re_c": _number, "im_c": _number, "horizon": _int, "separation": _number,
        "semi_hyperbolic": _bool, "landing_index": _nullable_int, "kappa": _nullable_number,
        "eta": _nullable_number, "omega_points": _int, "min_return_distance": _number,
    },
    "additionalProperties": False,
}

CONICAL_JSON = {"type": "array", "items": {"oneOf": [_mm0, _lm1, _semi]}}

POINCARE_JSON = {
    "type": "object",
    "required": ["degree", "re_c", "im_c", "period", "re_point", "im_point", "re_multiplier", "im_multiplier",
                 "depth", "domain_radius", "gap", "samples"],
    "properties": {
        "degree": _int, "re_c": _number, "im_c": _number, "period": _int, "re_point": _number, "im_point": _number,
        "re_multiplier": _number, "im_multiplier": _number, "depth": _int, "domain_radius": _number,
        "gap": _number, "samples": _int,
    },
    "additionalProperties": False,
}

JSON_SCHEMAS = {
    "render.json": RENDER_JSON,
    "similarity.json": SIMILARITY_JSON,
    "conical.json": CONICAL_JSON,
    "poincare.json": POINCARE_JSON,
}
