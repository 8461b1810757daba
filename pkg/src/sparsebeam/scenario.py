"""Scenario configuration: JSON loading, validation, unit conversion.

The JSON schema shipped in ``data/scenario.schema.json`` is the documented
config surface; unknown keys are rejected.  Powers may be given in watts or
as "<x> dBm" strings, ratios as linear numbers or "<x> dB" strings; the
loaded Scenario always carries linear units.
"""

import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import jsonschema

from .admm import AdmmConfig
from .arrays import ArrayGeometry, db_to_linear, dbm_to_watts
from .errors import ConfigurationError

DEFAULT_SWEEP_SPAN_DEG = (-45.0, 45.0)


def _data_path(name):
    return resources.files("sparsebeam").joinpath("data", name)


def bundled_scenario_path(name="paper_sec4"):
    """Filesystem path of a scenario shipped with the package."""
    return str(_data_path(f"{name}.json"))


def _load_schema():
    with _data_path("scenario.schema.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


def parse_power_watts(value, field):
    """A power given as watts (number), '<x> W', or '<x> dBm'."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        text = value.strip().lower().replace(" ", "")
        try:
            if text.endswith("dbm"):
                return dbm_to_watts(float(text[:-3]))
            if text.endswith("w"):
                return float(text[:-1])
        except ValueError:
            pass
    raise ConfigurationError(
        f"{field}: expected watts, '<x> W', or '<x> dBm', got {value!r}"
    )


def parse_ratio_linear(value, field):
    """A ratio given as a linear number or a '<x> dB' string."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        text = value.strip().lower().replace(" ", "")
        if text.endswith("db"):
            try:
                return db_to_linear(float(text[:-2]))
            except ValueError:
                pass
    raise ConfigurationError(
        f"{field}: expected a linear ratio or '<x> dB', got {value!r}"
    )


def _per_item(value, count, parser, field):
    """Broadcast a scalar or validate a list of length ``count``."""
    if isinstance(value, list):
        if len(value) != count:
            raise ConfigurationError(
                f"{field}: expected {count} entries, got {len(value)}"
            )
        return tuple(parser(item, field) for item in value)
    return tuple(parser(value, field) for _ in range(count))


@dataclass(frozen=True)
class Scenario:
    """One full experiment description, all values linear."""

    geometry: ArrayGeometry
    num_selected: int
    user_angles_deg: tuple
    channel_model: str
    channel_gain: float
    mainlobe_region: tuple
    mainlobe_step_deg: float
    stopband_regions: tuple
    stopband_step_deg: float
    mainlobe_threshold: float
    stopband_threshold: float
    antenna_power_limit_w: tuple
    noise_variance: tuple
    sinr_target: tuple
    admm: AdmmConfig
    seed: int
    sweep_user_span_deg: tuple = DEFAULT_SWEEP_SPAN_DEG

    def __post_init__(self):
        N = self.geometry.num_antennas
        M = len(self.user_angles_deg)
        if M < 1:
            raise ConfigurationError("at least one user is required")
        if not 1 <= self.num_selected <= N:
            raise ConfigurationError(
                f"num_selected must be in 1..{N}, got {self.num_selected}"
            )
        if self.channel_model not in ("los", "rayleigh"):
            raise ConfigurationError(
                f"channel_model must be 'los' or 'rayleigh', got {self.channel_model!r}"
            )
        if not self.mainlobe_threshold > 0:
            raise ConfigurationError("mainlobe_threshold must be > 0")
        if not self.stopband_threshold > 0:
            raise ConfigurationError("stopband_threshold must be > 0")
        for name, values in (
            ("antenna_power_limit", self.antenna_power_limit_w),
            ("noise_variance", self.noise_variance),
            ("sinr_target", self.sinr_target),
        ):
            if any(not value > 0 for value in values):
                raise ConfigurationError(f"{name}: every entry must be > 0")
        if len(self.antenna_power_limit_w) != N:
            raise ConfigurationError(
                f"antenna_power_limit: expected {N} entries, got "
                f"{len(self.antenna_power_limit_w)}"
            )
        for name, values in (
            ("noise_variance", self.noise_variance),
            ("sinr_target", self.sinr_target),
        ):
            if len(values) != M:
                raise ConfigurationError(
                    f"{name}: expected {M} entries, got {len(values)}"
                )

    @property
    def M(self):
        return len(self.user_angles_deg)

    @property
    def N(self):
        return self.geometry.num_antennas


def scenario_from_dict(data):
    """Validate a raw config dict against the schema and convert units."""
    try:
        jsonschema.validate(data, _load_schema())
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigurationError(f"scenario field {where}: {err.message}") from err

    array = data["array"]
    users = data["users"]
    admm = data.get("admm", {})
    geometry = ArrayGeometry(
        num_antennas=array["num_antennas"],
        element_spacing=array.get("element_spacing_wl", 0.5),
    )
    N = geometry.num_antennas
    M = len(users["angles_deg"])
    sweep = data.get("sweep", {})
    span = sweep.get("user_span_deg", list(DEFAULT_SWEEP_SPAN_DEG))
    return Scenario(
        geometry=geometry,
        num_selected=data["num_selected"],
        user_angles_deg=tuple(float(a) for a in users["angles_deg"]),
        channel_model=users.get("channel_model", "los"),
        channel_gain=float(users.get("gain", 1.0)),
        mainlobe_region=tuple(float(x) for x in data["mainlobe"]["region_deg"]),
        mainlobe_step_deg=float(data["mainlobe"].get("step_deg", 2.0)),
        stopband_regions=tuple(
            tuple(float(x) for x in region)
            for region in data["stopband"]["regions_deg"]
        ),
        stopband_step_deg=float(data["stopband"].get("step_deg", 5.0)),
        mainlobe_threshold=float(data["mainlobe_threshold"]),
        stopband_threshold=float(data["stopband_threshold"]),
        antenna_power_limit_w=_per_item(
            data["antenna_power_limit"], N, parse_power_watts, "antenna_power_limit"
        ),
        noise_variance=_per_item(
            data["noise_variance"], M, lambda v, f: float(v), "noise_variance"
        ),
        sinr_target=_per_item(
            data["sinr_target"], M, parse_ratio_linear, "sinr_target"
        ),
        admm=AdmmConfig(
            eta=float(admm["eta"]),
            rho=float(admm["rho"]),
            k_max=int(admm.get("k_max", 100)),
            primal_tol=admm.get("primal_tol"),
            dual_tol=admm.get("dual_tol"),
            parallel=int(admm.get("parallel", 1)),
        ),
        seed=int(data["seed"]),
        sweep_user_span_deg=tuple(float(x) for x in span),
    )


def load_scenario(path):
    """Load and validate a scenario JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigurationError(f"{path}: not valid JSON ({err})") from err
    return scenario_from_dict(data)


def scenario_to_dict(scenario):
    """Canonical dict form (linear units) that round-trips through the loader."""
    return {
        "array": {
            "num_antennas": scenario.geometry.num_antennas,
            "element_spacing_wl": scenario.geometry.element_spacing,
        },
        "num_selected": scenario.num_selected,
        "users": {
            "angles_deg": list(scenario.user_angles_deg),
            "channel_model": scenario.channel_model,
            "gain": scenario.channel_gain,
        },
        "mainlobe": {
            "region_deg": list(scenario.mainlobe_region),
            "step_deg": scenario.mainlobe_step_deg,
        },
        "stopband": {
            "regions_deg": [list(r) for r in scenario.stopband_regions],
            "step_deg": scenario.stopband_step_deg,
        },
        "mainlobe_threshold": scenario.mainlobe_threshold,
        "stopband_threshold": scenario.stopband_threshold,
        "antenna_power_limit": list(scenario.antenna_power_limit_w),
        "noise_variance": list(scenario.noise_variance),
        "sinr_target": list(scenario.sinr_target),
        "admm": {
            "eta": scenario.admm.eta,
            "rho": scenario.admm.rho,
            "k_max": scenario.admm.k_max,
            "primal_tol": scenario.admm.primal_tol,
            "dual_tol": scenario.admm.dual_tol,
            "parallel": scenario.admm.parallel,
        },
        "seed": scenario.seed,
        "sweep": {"user_span_deg": list(scenario.sweep_user_span_deg)},
    }


def write_scenario(scenario, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2, sort_keys=True)
        fh.write("\n")


def scenario_sha256(scenario):
    """Stable hash of the canonical scenario dict, for artifact provenance.

    The thread-pool width is an execution knob, not part of the experiment,
    so it is normalized out: reruns with different ``--parallel`` values hash
    (and must reproduce) identically.
    """
    data = scenario_to_dict(scenario)
    data["admm"] = {k: v for k, v in data["admm"].items() if k != "parallel"}
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
