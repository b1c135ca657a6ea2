"""Run and probe manifests: INI documents read with :mod:`configparser`.

A run manifest has one ``[run]`` section and one ``[dataset:<name>]`` section
per series.  Keys of ``[run]`` (all optional)::

    models          comma list of model kinds          (taylor2, residual, ...)
    learning_rates  comma list                         (0.1, 0.01, 0.001)
    input_lens      comma list                         (3, 5, 7, 9, 11, 13)
    seeds           comma list                         (0, 1, 2)
    substeps        comma list, recursive kinds only   (2, 3, ..., 8)
    split           train, val, test fractions         (0.7, 0.15, 0.15)
    max_epochs / patience / batch_size / hidden_size   (2000 / 50 / 32 / 128)
    output          output directory, relative to the manifest (results)
    workers         worker processes                   (1)

A dataset section either points at a file (``path``, ``column``,
``has_header``) or names a synthetic family (``synthetic = sine`` plus any
:class:`~taylornet.synth.SyntheticSpec` field such as ``n`` or ``omega``).

A probe manifest has one or more ``[probe]`` / ``[probe:<name>]`` sections,
each with the synthetic fields (``family``, ``n``, ...), a ``model`` and the
single training configuration (``learning_rate``, ``input_len``, ``seed``,
``substeps``, ``max_epochs``, ``patience``, ``batch_size``, ``hidden_size``,
``split``).  ``[run]`` may set ``output``.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..data import SplitSpec, TimeSeries, load_series
from ..errors import ConfigurationError
from ..models import ModelKind
from ..synth import SyntheticSpec, generate
from ..train import INPUT_LENS, LEARNING_RATES, SUBSTEPS

DEFAULT_SEEDS = (0, 1, 2)
_SYNTH_FIELDS = {f.name: f.type for f in dataclasses.fields(SyntheticSpec)}


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    path: Path | None = None
    column: str | int = 0
    has_header: bool = False
    synthetic: SyntheticSpec | None = None

    def load(self) -> TimeSeries:
        if self.synthetic is not None:
            return generate(self.synthetic, name=self.name)
        return load_series(self.path, self.column, self.has_header, name=self.name)


@dataclass
class RunManifest:
    datasets: list[DatasetEntry]
    models: list[ModelKind]
    learning_rates: list[float] = field(default_factory=lambda: list(LEARNING_RATES))
    input_lens: list[int] = field(default_factory=lambda: list(INPUT_LENS))
    seeds: list[int] = field(default_factory=lambda: list(DEFAULT_SEEDS))
    substeps: list[int] = field(default_factory=lambda: list(SUBSTEPS))
    split: SplitSpec = field(default_factory=SplitSpec)
    max_epochs: int = 2000
    patience: int = 50
    batch_size: int = 32
    hidden_size: int = 128
    output: Path = Path("results")
    workers: int = 1

    def validate(self):
        if not self.datasets:
            raise ConfigurationError("manifest lists no datasets")
        if not self.models:
            raise ConfigurationError("manifest lists no models")
        for key in ("learning_rates", "input_lens", "seeds"):
            if not getattr(self, key):
                raise ConfigurationError(f"grid list {key!r} is empty")
        if any(m.is_recursive for m in self.models) and not self.substeps:
            raise ConfigurationError("recursive models need a nonempty substeps list")
        if any(s < 2 for s in self.substeps):
            raise ConfigurationError("substeps must all be >= 2")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigurationError("dataset names must be unique")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        return self


def parse_list(text: str, cast) -> list:
    items = [t.strip() for t in text.replace(";", ",").split(",")]
    try:
        return [cast(t) for t in items if t]
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse list {text!r}: {exc}") from None


def _split(text: str) -> SplitSpec:
    fracs = parse_list(text, float)
    if len(fracs) != 3:
        raise ConfigurationError(f"split needs three fractions, got {text!r}")
    return SplitSpec(*fracs)


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {text!r}")


def _synthetic(section, family: str) -> SyntheticSpec:
    kwargs = {"family": family.strip()}
    for key, raw in section.items():
        if key in ("synthetic", "family") or key not in _SYNTH_FIELDS:
            continue
        kwargs[key] = int(raw) if key in ("n", "seed") else float(raw)
    try:
        return SyntheticSpec(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None


def _read(path) -> configparser.ConfigParser:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such manifest: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    return parser


def _get(section, key, cast, default):
    if section is None or key not in section:
        return default
    try:
        return cast(section[key])
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {key!r}: {exc}") from None


def load_manifest(path) -> RunManifest:
    path = Path(path)
    parser = _read(path)
    base = path.parent
    run = parser["run"] if parser.has_section("run") else None

    datasets = []
    for name in parser.sections():
        if not name.startswith("dataset:"):
            continue
        sec = parser[name]
        label = name.split(":", 1)[1].strip()
        if "synthetic" in sec:
            datasets.append(DatasetEntry(label, synthetic=_synthetic(sec, sec["synthetic"])))
            continue
        if "path" not in sec:
            raise ConfigurationError(f"[{name}] needs 'path' or 'synthetic'")
        column = sec.get("column", "0").strip()
        datasets.append(DatasetEntry(
            label,
            path=(base / sec["path"].strip()),
            column=int(column) if column.lstrip("-").isdigit() else column,
            has_header=_bool(sec.get("has_header", "false")),
        ))

    manifest = RunManifest(
        datasets=datasets,
        models=_get(run, "models", lambda s: [ModelKind.parse(m) for m in parse_list(s, str)], []),
        learning_rates=_get(run, "learning_rates", lambda s: parse_list(s, float), list(LEARNING_RATES)),
        input_lens=_get(run, "input_lens", lambda s: parse_list(s, int), list(INPUT_LENS)),
        seeds=_get(run, "seeds", lambda s: parse_list(s, int), list(DEFAULT_SEEDS)),
        substeps=_get(run, "substeps", lambda s: parse_list(s, int), list(SUBSTEPS)),
        split=_get(run, "split", _split, SplitSpec()),
        max_epochs=_get(run, "max_epochs", int, 2000),
        patience=_get(run, "patience", int, 50),
        batch_size=_get(run, "batch_size", int, 32),
        hidden_size=_get(run, "hidden_size", int, 128),
        output=base / _get(run, "output", str.strip, "results"),
        workers=_get(run, "workers", int, 1),
    )
    return manifest


@dataclass
class ProbeConfig:
    name: str
    synthetic: SyntheticSpec
    model: ModelKind
    learning_rate: float = 0.01
    input_len: int = 5
    seed: int = 0
    substeps: int = 4
    max_epochs: int = 2000
    patience: int = 50
    batch_size: int = 32
    hidden_size: int = 128
    split: SplitSpec = field(default_factory=SplitSpec)


def load_probe_manifest(path) -> tuple[list[ProbeConfig], Path]:
    path = Path(path)
    parser = _read(path)
    run = parser["run"] if parser.has_section("run") else None
    output = path.parent / _get(run, "output", str.strip, "probe_results")
    probes = []
    for name in parser.sections():
        if name != "probe" and not name.startswith("probe:"):
            continue
        sec = parser[name]
        if "family" not in sec or "model" not in sec:
            raise ConfigurationError(f"[{name}] needs 'family' and 'model'")
        label = name.split(":", 1)[1].strip() if ":" in name else sec["family"].strip()
        probes.append(ProbeConfig(
            name=label,
            synthetic=_synthetic(sec, sec["family"]),
            model=ModelKind.parse(sec["model"]),
            learning_rate=_get(sec, "learning_rate", float, 0.01),
            input_len=_get(sec, "input_len", int, 5),
            seed=_get(sec, "seed", int, 0),
            substeps=_get(sec, "substeps", int, 4),
            max_epochs=_get(sec, "max_epochs", int, 2000),
            patience=_get(sec, "patience", int, 50),
            batch_size=_get(sec, "batch_size", int, 32),
            hidden_size=_get(sec, "hidden_size", int, 128),
            split=_get(sec, "split", _split, SplitSpec()),
        ))
    if not probes:
        raise ConfigurationError(f"{path}: no [probe] sections")
    return probes, output
