"""Run manifests: plain ``key = value`` files that drive a study.

Grammar: one ``key = value`` pair per line; blank lines and lines starting
with ``#`` are ignored; list values are comma separated. Unknown keys and
repeated keys are errors. Relative data paths resolve against the
manifest's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..errors import UsageError
from ..model import DEFAULT_TAU_GRID, InstrumentBlock, ModelSpec
from .io import ColumnSchema, load_csv
from .report import FORMATS, render_report
from .study import ESTIMATORS, StudyConfig, run_study

KEYS = {
    "data": "comma-separated CSV files (required)",
    "response": "response column (required)",
    "regressors": "comma-separated regressor columns (required)",
    "intercept": "true/false, default true",
    "log": "auto | none | comma list of columns logged at load time, default auto",
    "fill.<COLUMN>": "forward-fill limit in days (0-5) for one column, default 0",
    "source.<COLUMN>": "file holding the column when several files share the header",
    "transform.<COLUMN>": "model transforms for one column: log, diff, lag(k), comma list",
    "endogenous": "endogenous regressor for 2SLS",
    "instruments": "extra excluded instruments (the lagged response is always used)",
    "estimators": f"subset of {', '.join(ESTIMATORS)}, default ols, bqr",
    "taus": "quantile grid, default 0.1, 0.2, ..., 0.9",
    "slope_pairs": "quantile pairs lo:hi for slope tests, or none; default 0.1:0.9",
    "seed": "master seed, default 0",
    "draws": "retained MCMC draws per quantile, default 11000",
    "burn_in": "MCMC burn-in sweeps, default 1000",
    "thin": "MCMC thinning, default 1",
    "beta_variance": "prior variance of each coefficient, default 1e4",
    "sigma_shape": "inverse-gamma prior shape for sigma, default 0.01",
    "sigma_rate": "inverse-gamma prior rate for sigma, default 0.01",
    "interval_mass": "credible/confidence interval mass, default 0.9",
    "bootstrap": "bootstrap replications for slope tests, default 200",
    "format": f"report format: {', '.join(FORMATS)}; default text",
    "output": "report path; default standard output",
    "chains_dir": "directory for per-quantile chain CSV files; default none",
}
_PREFIXES = ("fill.", "source.", "transform.")


def manifest_help():
    width = max(map(len, KEYS))
    return "\n".join(f"  {k:<{width}}  {v}" for k, v in KEYS.items())


def _split(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def _bool(key, value):
    v = value.lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise UsageError(f"{key}: expected true or false, got {value!r}")


def _number(key, value, kind):
    try:
        return kind(value)
    except ValueError:
        raise UsageError(f"{key}: expected {kind.__name__}, got {value!r}") from None


def parse_manifest(text, origin="<manifest>"):
    """Parse manifest text into a ``{key: raw string}`` mapping."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{origin}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        known = key in KEYS or (key.startswith(_PREFIXES) and key.split(".", 1)[1])
        if not known:
            raise UsageError(f"{origin}:{lineno}: unknown key {key!r}")
        if key in out:
            raise UsageError(f"{origin}:{lineno}: key {key!r} repeated")
        out[key] = value
    for key in ("data", "response", "regressors"):
        if key not in out:
            raise UsageError(f"{origin}: missing required key {key!r}")
    return out


@dataclass
class Manifest:
    paths: list
    schemas: list
    spec: ModelSpec
    taus: list
    estimators: list
    config: StudyConfig
    format: str = "text"
    output: Path | None = None
    chains_dir: Path | None = None
    raw: dict = field(default_factory=dict)


def _pairs(value):
    if value.lower() == "none":
        return ()
    pairs = []
    for item in _split(value):
        lo, sep, hi = item.partition(":")
        if not sep:
            raise UsageError(f"slope_pairs: expected lo:hi, got {item!r}")
        pairs.append((_number("slope_pairs", lo, float), _number("slope_pairs", hi, float)))
    return tuple(pairs)


def build_manifest(raw, base_dir="."):
    base = Path(base_dir)
    paths = [(base / p) for p in _split(raw["data"])]
    response = raw["response"]
    regressors = _split(raw["regressors"])
    endogenous = raw.get("endogenous")
    instruments = _split(raw.get("instruments", ""))
    block = InstrumentBlock(endogenous, tuple(instruments)) if endogenous else None
    if instruments and not endogenous:
        raise UsageError("instruments given without an endogenous variable")
    transforms = {k.split(".", 1)[1]: _split(v) for k, v in raw.items() if k.startswith("transform.")}
    spec = ModelSpec(response, tuple(regressors), _bool("intercept", raw.get("intercept", "true")),
                     transforms, block)

    log = raw.get("log", "auto").strip()
    logged = set() if log.lower() in ("auto", "none") else set(_split(log))
    columns = spec.columns
    for key in raw:
        if key.startswith(_PREFIXES) and key.split(".", 1)[1] not in columns:
            raise UsageError(f"{key}: column is not used by the model")
    if logged - set(columns):
        raise UsageError(f"log: columns not used by the model: {sorted(logged - set(columns))}")
    schemas = []
    for col in columns:
        if log.lower() == "auto":
            tf = "auto"
        else:
            tf = "log" if col in logged else "none"
        fill = _number(f"fill.{col}", raw.get(f"fill.{col}", "0"), int)
        schemas.append(ColumnSchema(col, source=raw.get(f"source.{col}"), transform=tf,
                                    fill_limit=fill))

    taus = ([_number("taus", t, float) for t in _split(raw["taus"])]
            if "taus" in raw else list(DEFAULT_TAU_GRID))
    estimators = _split(raw.get("estimators", "ols, bqr"))
    defaults = StudyConfig()
    config = StudyConfig(
        seed=_number("seed", raw.get("seed", str(defaults.seed)), int),
        draws=_number("draws", raw.get("draws", str(defaults.draws)), int),
        burn_in=_number("burn_in", raw.get("burn_in", str(defaults.burn_in)), int),
        thin=_number("thin", raw.get("thin", str(defaults.thin)), int),
        beta_variance=_number("beta_variance", raw.get("beta_variance", str(defaults.beta_variance)), float),
        sigma_shape=_number("sigma_shape", raw.get("sigma_shape", str(defaults.sigma_shape)), float),
        sigma_rate=_number("sigma_rate", raw.get("sigma_rate", str(defaults.sigma_rate)), float),
        interval_mass=_number("interval_mass", raw.get("interval_mass", str(defaults.interval_mass)), float),
        bootstrap=_number("bootstrap", raw.get("bootstrap", str(defaults.bootstrap)), int),
        slope_pairs=_pairs(raw["slope_pairs"]) if "slope_pairs" in raw else defaults.slope_pairs,
    )
    fmt = raw.get("format", "text")
    if fmt not in FORMATS:
        raise UsageError(f"format: expected one of {FORMATS}, got {fmt!r}")
    output = base / raw["output"] if raw.get("output") else None
    chains_dir = base / raw["chains_dir"] if raw.get("chains_dir") else None
    return Manifest(paths, schemas, spec, taus, estimators, config, fmt, output, chains_dir, raw)


def load_manifest(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read manifest {path}: {e.strerror}") from None
    return build_manifest(parse_manifest(text, str(path)), path.parent)


def run_manifest(manifest, format=None):
    """Load data, run the study and render the report; returns (result, report)."""
    dataset = load_csv(manifest.paths, manifest.schemas)
    result = run_study(dataset, manifest.spec, manifest.taus, manifest.estimators, manifest.config)
    title = (f"Quantile regression results for {result.meta['response']} "
             f"({result.meta['n']} observations)")
    report = render_report(result.table, result.tests, format or manifest.format, title)
    return result, report
