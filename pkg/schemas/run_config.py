"""Flat key = value run configuration for experiment sweeps.

Example::

    # gap law at the reference couplings
    experiment = gap-scan
    J = 0.5
    Jp = 0.27
    L_list = 51:151:50

Lines are tokenized with the python-dotenv parser, so values may be quoted and trailing
``# comments`` need a space before the hash. Lists are comma separated; ``start:stop:step``
ranges include ``stop``. Every error carries the line number and field name it came from.
"""
import hashlib
import io
import os
from dataclasses import asdict, dataclass
from typing import Dict, Iterator, Mapping, Optional, Tuple

from dotenv.parser import parse_stream

from models.chain_models import ModelParams
from models.errors import ConfigError, ParameterError
from cd.generators import CD_MODES
from dynamics.propagation import STEPPERS

EXPERIMENTS = ("crossing-report", "gap-scan", "gap-cd-scan", "dynamics", "qbcd-dynamics", "cost-scan")
FORMATS = ("csv", "json")

# exact AGP denominators are unreliable beyond this length
EXACT_AGP_MAX_L = 51

DEFAULT_CD_MODES = {
    "gap-cd-scan": ("var1",),
    "dynamics": ("bare",),
    "qbcd-dynamics": ("bare", "qbcd"),
    "cost-scan": ("var1", "var2", "qbcd"),
}
ALLOWED_CD_MODES = {
    "gap-cd-scan": ("var1", "var2", "qbcd", "exact_agp"),
    "qbcd-dynamics": ("bare", "qbcd"),
    "cost-scan": ("var1", "var2", "qbcd"),
}

TRUE_WORDS = ("1", "true", "yes", "on")
FALSE_WORDS = ("0", "false", "no", "off")


def default_output_dir() -> str:
    return os.environ.get('BOTTLENECK_CD_OUTPUT_DIR', 'results')


@dataclass(frozen=True)
class RunConfig:
    """Model representing one validated experiment sweep"""
    experiment: str
    J: float = 0.5
    Jp: float = 0.27
    L_list: Tuple[int, ...] = ()
    T_list: Tuple[float, ...] = ()
    cd_modes: Tuple[str, ...] = ()
    dt: Optional[float] = None
    stepper: str = "midpoint"
    check_convergence: bool = False
    coefficient_grid: int = 0
    n_grid: int = 200
    n_samples: int = 0
    format: str = "csv"
    output_dir: str = "results"

    def params(self, L: int) -> ModelParams:
        return ModelParams.from_length(L, J=self.J, Jp=self.Jp)

    def to_dict(self):
        """Convert configuration to dictionary"""
        data = asdict(self)
        data['L_list'] = list(self.L_list)
        data['T_list'] = list(self.T_list)
        data['cd_modes'] = list(self.cd_modes)
        return data

    def normalized_text(self) -> str:
        """Canonical key = value rendering; output_dir is excluded so moved runs hash alike"""
        lines = []
        for key, value in sorted(self.to_dict().items()):
            if key == 'output_dir':
                continue
            if isinstance(value, list):
                value = ",".join(repr(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.normalized_text().encode("utf-8")).hexdigest()


# ============== VALUE PARSERS ==============

def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    value = float(text)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError("must be finite")
    return value


def _parse_bool(text: str) -> bool:
    word = text.lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int_list(text: str) -> Tuple[int, ...]:
    values = []
    for item in _split(text):
        if ':' in item:
            start, stop, step = (int(p) for p in _range_parts(item))
            if step <= 0 or stop < start:
                raise ValueError(f"bad range {item!r}")
            values.extend(range(start, stop + 1, step))
        else:
            values.append(int(item))
    return tuple(values)


def _parse_float_list(text: str) -> Tuple[float, ...]:
    values = []
    for item in _split(text):
        if ':' in item:
            start, stop, step = (_parse_float(p) for p in _range_parts(item))
            if step <= 0 or stop < start:
                raise ValueError(f"bad range {item!r}")
            count = int(round((stop - start) / step))
            values.extend(start + k * step for k in range(count + 1))
        else:
            values.append(_parse_float(item))
    return tuple(values)


def _parse_modes(text: str) -> Tuple[str, ...]:
    modes = tuple(_split(text))
    for mode in modes:
        if mode not in CD_MODES:
            raise ValueError(f"unknown cd_mode {mode!r}; expected one of {', '.join(CD_MODES)}")
    return modes


def _parse_dt(text: str) -> Optional[float]:
    if text.lower() == "auto":
        return None
    value = _parse_float(text)
    if value <= 0:
        raise ValueError("must be positive or 'auto'")
    return value


def _parse_choice(choices):
    def parse(text: str) -> str:
        if text not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}, got {text!r}")
        return text
    return parse


def _split(text: str):
    items = [item.strip() for item in text.split(',')]
    if not all(items):
        raise ValueError("empty list entry")
    return items


def _range_parts(item: str):
    parts = item.split(':')
    if len(parts) != 3:
        raise ValueError(f"range must be start:stop:step, got {item!r}")
    return parts


FIELD_PARSERS = {
    'experiment': ('experiment', _parse_choice(EXPERIMENTS)),
    'J': ('J', _parse_float),
    'Jp': ('Jp', _parse_float),
    'L_list': ('L_list', _parse_int_list),
    'T_list': ('T_list', _parse_float_list),
    'cd_mode': ('cd_modes', _parse_modes),
    'dt': ('dt', _parse_dt),
    'stepper': ('stepper', _parse_choice(STEPPERS)),
    'check_convergence': ('check_convergence', _parse_bool),
    'coefficient_grid': ('coefficient_grid', _parse_int),
    'n_grid': ('n_grid', _parse_int),
    'n_samples': ('n_samples', _parse_int),
    'format': ('format', _parse_choice(FORMATS)),
    'output_dir': ('output_dir', str),
}


# ============== PARSING ==============

def parse_config_text(
    text: str,
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, str]] = None,
    experiment: Optional[str] = None,
) -> RunConfig:
    """Parse and validate configuration text; overrides are raw values keyed like the file.

    ``experiment`` names the experiment requested on the command line; a file that declares a
    different one is rejected.
    """
    values: Dict[str, object] = {}
    lines: Dict[str, Optional[int]] = {}

    for key, value, number in _tokenize(text, path):
        _assign(key, value, number, path, values, lines)

    if experiment is not None:
        declared = values.get('experiment')
        if declared is None:
            _assign('experiment', experiment, None, path, values, lines)
        elif declared != experiment:
            raise ConfigError(
                f"file declares {declared!r} but {experiment!r} was requested",
                line=lines['experiment'], field='experiment', path=path,
            )

    for key, value in (overrides or {}).items():
        if value is not None:
            _assign(key, str(value), None, path, values, lines, override=True)

    return _validate(values, lines, path)


def _tokenize(text: str, path: Optional[str]) -> Iterator[Tuple[str, str, int]]:
    """(key, raw value, line) for every assignment, in file order"""
    for binding in parse_stream(io.StringIO(text)):
        string = binding.original.string
        # bindings absorb the blank lines in front of them
        number = binding.original.line + string[:len(string) - len(string.lstrip())].count("\n")
        if binding.error or (binding.key is not None and binding.value is None):
            raise ConfigError("expected 'key = value'", line=number, path=path)
        if binding.key is not None:
            yield binding.key, binding.value.strip(), number


def load_config(
    path: str,
    overrides: Optional[Mapping[str, str]] = None,
    experiment: Optional[str] = None,
) -> RunConfig:
    """Read a configuration file from disk"""
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc.strerror or exc}", path=path) from exc
    return parse_config_text(text, path=path, overrides=overrides, experiment=experiment)


def _assign(key, value, number, path, values, lines, override=False):
    if key not in FIELD_PARSERS:
        raise ConfigError(f"unknown key; expected one of {', '.join(FIELD_PARSERS)}", line=number, field=key, path=path)
    name, parser = FIELD_PARSERS[key]
    if name in values and not override:
        raise ConfigError(f"duplicate key (first set on line {lines[name]})", line=number, field=key, path=path)
    if value == "":
        raise ConfigError("missing value", line=number, field=key, path=path)
    try:
        values[name] = parser(value)
    except ValueError as exc:
        raise ConfigError(str(exc), line=number, field=key, path=path) from exc
    lines[name] = number


def _validate(values: Dict[str, object], lines: Dict[str, Optional[int]], path: Optional[str]) -> RunConfig:
    def fail(message: str, name: str):
        field = 'cd_mode' if name == 'cd_modes' else name
        raise ConfigError(message, line=lines.get(name), field=field, path=path)

    if 'experiment' not in values:
        raise ConfigError("required key is missing", field='experiment', path=path)
    experiment = values['experiment']
    values.setdefault('output_dir', default_output_dir())
    values.setdefault('cd_modes', DEFAULT_CD_MODES.get(experiment, ()))
    if experiment == 'crossing-report':
        values.setdefault('format', 'json')
    config = RunConfig(**values)

    try:
        ModelParams(ell=2, J=config.J, Jp=config.Jp)
    except ParameterError as exc:
        fail(str(exc), 'Jp' if 'Jp' in lines else 'J')
    if experiment != 'crossing-report' and not config.L_list:
        fail(f"required for experiment {experiment}", 'L_list')
    for L in config.L_list:
        try:
            config.params(L)
        except ParameterError as exc:
            fail(str(exc), 'L_list')

    needs_times = experiment in ('gap-cd-scan', 'dynamics', 'qbcd-dynamics')
    if needs_times and not config.T_list:
        fail(f"required for experiment {experiment}", 'T_list')
    if any(T <= 0 for T in config.T_list):
        fail("driving times must be positive", 'T_list')

    allowed = ALLOWED_CD_MODES.get(experiment, CD_MODES)
    for mode in config.cd_modes:
        if mode not in allowed:
            fail(f"{mode!r} is not valid for {experiment}; expected one of {', '.join(allowed)}", 'cd_modes')
    if 'exact_agp' in config.cd_modes and max(config.L_list, default=0) > EXACT_AGP_MAX_L:
        fail(f"exact_agp is limited to L <= {EXACT_AGP_MAX_L}", 'cd_modes')

    if config.dt is not None and config.T_list and config.dt >= min(config.T_list):
        fail(f"dt={config.dt} must be smaller than every T (min {min(config.T_list)})", 'dt')
    if config.coefficient_grid < 0:
        fail("must be >= 0", 'coefficient_grid')
    if config.n_grid < 3:
        fail("must be >= 3", 'n_grid')
    if config.n_samples < 0:
        fail("must be >= 0", 'n_samples')
    return config
