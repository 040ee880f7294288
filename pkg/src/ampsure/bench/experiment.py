"""Experiment configuration, dataset handling and report emission.

Every run writes into ``cfg.out``:

* ``metrics.csv``: one row per (image, method, rate), sorted.
* ``table.tsv``: mean PSNR and run time per method and rate, laid out like
  the usual "method x sampling rate" comparison tables.
* ``images/*.pgm``: recovered images (8-bit).
* ``histograms/*.tsv``: normalized effective-noise histograms (optional).
* ``traces/*.tsv``: per-iteration noise estimates (optional).
* ``weights/*.ampw``: trained denoisers.
"""

import csv
import dataclasses
import io
import logging
import os
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .. import measure_ops
from ..damp import DAmpConfig, DenoiserBank, Estimator
from ..denoise import HardThresholdDCT, Identity, Scale, SoftThresholdDCT
from ..errors import AmpSureError, ConfigError
from ..learn import ARCHITECTURES, TrainConfig, joint_loop, load_weights, pretrain, save_weights, train
from ..learn.joint import run_all
from ..learn.training import Objective, TrainingPair, TrainingSample
from ..sure import unbiasedness_report
from ..synthetic import image_set
from .imageio import IMAGE_SUFFIXES, ingest_image, quantize, write_pgm
from .metrics import psnr, residual_histogram

__all__ = [
    "ExperimentConfig",
    "PROFILES",
    "CSV_COLUMNS",
    "MetricsRow",
    "parse_config_text",
    "load_config",
    "run_experiment",
    "compare_estimators",
    "EstimatorReport",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("image_id", "method", "rate", "psnr_db", "runtime_s", "sigma_hat_final", "sigma_true_final")

PROFILES = {
    "gaussian": dict(operator="gaussian", estimator="measurement", sigma_switch=55.0, outer_rounds=2, sigma_max=55.0),
    "cdp": dict(operator="cdp", estimator="image", sigma_switch=55.0, outer_rounds=2, sigma_max=55.0),
    "mri": dict(operator="mri", estimator="image", sigma_switch=10.0, outer_rounds=1, sigma_max=10.0),
}

MODES = ("recover", "train", "joint", "compare-estimators", "sure-check", "eval")


def _bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _rates(v):
    if isinstance(v, (list, tuple)):
        return tuple(float(r) for r in v)
    return tuple(float(r) for r in str(v).replace(",", " ").split())


def _opt_str(v):
    s = str(v).strip()
    return None if s.lower() in ("", "none") else s


def _opt_int(v):
    s = _opt_str(v)
    return None if s is None else int(s)


@dataclass(frozen=True)
class ExperimentConfig:
    # operator
    operator: str = "gaussian"
    rates: tuple = (0.25,)
    op_seed: int = 0
    noise_sigma: float = 0.0
    # D-AMP
    iterations: int = 10
    estimator: str = "measurement"
    sigma_switch: float = 55.0
    probe_epsilon_factor: float = 0.1
    clamp: bool = True
    # denoiser and training
    arch: str = "shrinkage"
    weights: str = None
    objective: str = "sure"
    epochs: int = 40
    batch_size: int = 64
    learning_rate: float = 0.02
    lr_drop_factor: float = 0.1
    lr_drop_epoch: int = 32
    patch_size: int = 50
    sigma_max: float = 55.0
    outer_rounds: int = 2
    train_epsilon_factor: float = 1e-2
    # data
    dataset: str = "synthetic"
    synthetic_count: int = 4
    synthetic_size: int = 64
    image_size: int = None
    subsample: int = 1
    # sure-check
    sure_denoiser: str = "softdct"
    sure_sigma: float = 25.0
    sure_trials: int = 200
    # eval
    recovered: str = None
    eval_method: str = "eval"
    # output
    out: str = "ampsure_out"
    emit_histograms: bool = True
    record_sigma_true: bool = True
    timing: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.operator not in ("gaussian", "cdp", "mri"):
            raise ConfigError(f"operator must be gaussian, cdp or mri, got {self.operator!r}")
        if not self.rates or any(not 0 < r <= 1 for r in self.rates):
            raise ConfigError(f"every rate must lie in (0, 1], got {self.rates}")
        if self.arch not in ARCHITECTURES:
            raise ConfigError(f"unknown arch {self.arch!r}; choose from {sorted(ARCHITECTURES)}")
        if self.objective not in ("mse", "sure"):
            raise ConfigError(f"objective must be mse or sure, got {self.objective!r}")
        if self.estimator not in ("measurement", "image"):
            raise ConfigError(f"estimator must be measurement or image, got {self.estimator!r}")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")

    def damp_config(self):
        return DAmpConfig(iterations=self.iterations, estimator=Estimator(self.estimator),
                          sigma_switch=self.sigma_switch, probe_epsilon_factor=self.probe_epsilon_factor,
                          clamp=self.clamp, probe_seed=self.seed)

    def train_config(self, seed_offset=0):
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size, learning_rate=self.learning_rate,
                           lr_drop_factor=self.lr_drop_factor, lr_drop_epoch=self.lr_drop_epoch,
                           patch_size=self.patch_size, sigma_max=self.sigma_max, outer_rounds=self.outer_rounds,
                           epsilon_factor=self.train_epsilon_factor, seed=self.seed + seed_offset)


_CONVERTERS = {
    bool: _bool,
    int: int,
    float: float,
    str: str,
    tuple: _rates,
}


def _convert(name, raw):
    f = {f.name: f for f in fields(ExperimentConfig)}.get(name)
    if f is None:
        raise ConfigError(f"unknown config key {name!r}")
    if name in ("weights", "recovered"):
        return _opt_str(raw)
    if name == "image_size":
        return _opt_int(raw)
    conv = _CONVERTERS[f.type]
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {raw!r} ({exc})") from None


def parse_config_text(text):
    """``key = value`` lines; ``#`` starts a comment. Returns a dict of typed values."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "rate":
            key = "rates"
        values[key] = _convert(key, raw)
    return values


def load_config(path=None, profile=None, overrides=None):
    """Defaults, then the profile, then the file, then explicit overrides."""
    values = {}
    if profile is not None:
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile {profile!r}")
        values.update(PROFILES[profile])
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                values.update(parse_config_text(f.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = _convert(k, v) if isinstance(v, str) else v
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# --- data -----------------------------------------------------------------

def load_dataset(cfg):
    """Sorted list of ``(image_id, image)``."""
    if cfg.dataset == "synthetic":
        imgs = image_set(cfg.synthetic_count, cfg.synthetic_size, cfg.seed)
        return [(f"synth{k:03d}", img) for k, img in enumerate(imgs)]
    if not os.path.isdir(cfg.dataset):
        raise ConfigError(f"dataset directory {cfg.dataset!r} does not exist")
    names = sorted(n for n in os.listdir(cfg.dataset) if n.lower().endswith(IMAGE_SUFFIXES))
    if not names:
        raise ConfigError(f"dataset directory {cfg.dataset!r} contains no .pgm or .png images")
    out = []
    for n in names:
        img = ingest_image(os.path.join(cfg.dataset, n), cfg.image_size, cfg.subsample)
        out.append((os.path.splitext(n)[0], img))
    shapes = {img.shape for _, img in out}
    if len(shapes) > 1:
        raise ConfigError(f"dataset images differ in size {sorted(shapes)}; set image_size to crop them")
    return out


def build_op(cfg, rate, shape):
    h, w = shape
    if cfg.operator == "gaussian":
        n = h * w
        return measure_ops.make_gaussian_op(max(1, int(np.floor(rate * n))), n, cfg.op_seed, image_shape=(h, w))
    if cfg.operator == "cdp":
        return measure_ops.make_cdp_op(w, h, rate, cfg.op_seed)
    return measure_ops.make_mri_op(w, h, rate, spokes_seed=cfg.op_seed)


def measure_all(op, images, cfg):
    seeds = np.random.SeedSequence([cfg.seed, 7]).generate_state(len(images), dtype=np.uint64)
    return [measure_ops.measure_with_noise(op, img, cfg.noise_sigma, int(s)) for img, s in zip(images, seeds)]


def _blind(cfg):
    if cfg.weights:
        d = load_weights(cfg.weights)
        return d
    return ARCHITECTURES[cfg.arch](sigma_range=(0.0, cfg.sigma_max))


# --- output ---------------------------------------------------------------

@dataclass(frozen=True)
class MetricsRow:
    image_id: str
    method: str
    rate: float
    psnr_db: float
    runtime_s: float = None
    sigma_hat_final: float = None
    sigma_true_final: float = None

    def cells(self):
        def num(v, fmt):
            return "" if v is None or not np.isfinite(v) else format(v, fmt)

        return [self.image_id, self.method, f"{self.rate:g}", num(self.psnr_db, ".4f"),
                num(self.runtime_s, ".4f"), num(self.sigma_hat_final, ".6f"), num(self.sigma_true_final, ".6f")]


class Writer:
    """Collects rows and artefacts; every file is written from the calling thread."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.root = cfg.out
        self.rows = []
        os.makedirs(self.root, exist_ok=True)

    def path(self, sub, name):
        d = os.path.join(self.root, sub) if sub else self.root
        os.makedirs(d, exist_ok=True)
        return os.path.join(d, name)

    def add(self, row):
        self.rows.append(row)

    def image(self, key, img):
        write_pgm(self.path("images", key + ".pgm"), img)

    def text(self, sub, name, content):
        with open(self.path(sub, name), "w", encoding="utf-8", newline="\n") as f:
            f.write(content)

    def sorted_rows(self):
        return sorted(self.rows, key=lambda r: (r.image_id, r.method, r.rate))

    def csv_text(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.sorted_rows():
            w.writerow(r.cells())
        return buf.getvalue()

    def table_text(self):
        rates = sorted({r.rate for r in self.rows})
        methods = sorted({r.method for r in self.rows})
        head = ["method"]
        for rate in rates:
            pct = f"{100 * rate:g}%"
            head += [f"{pct} psnr_db", f"{pct} runtime_s"]
        lines = ["\t".join(head)]
        for m in methods:
            cells = [m]
            for rate in rates:
                sel = [r for r in self.rows if r.method == m and r.rate == rate]
                ps = [r.psnr_db for r in sel if r.psnr_db is not None]
                ts = [r.runtime_s for r in sel if r.runtime_s is not None]
                cells.append(f"{np.mean(ps):.2f}" if ps else "")
                cells.append(f"{np.mean(ts):.2f}" if ts else "")
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    def finish(self):
        if self.rows:
            self.text(None, "metrics.csv", self.csv_text())
            self.text(None, "table.tsv", self.table_text())


def _key(image_id, method, rate):
    return f"{image_id}__{method}__r{rate:g}"


def _trace_tsv(trace):
    cols = ["t", "sigma_hat", "sigma_measurement", "sigma_image", "sigma_true", "denoiser"]
    lines = ["\t".join(cols)]
    for rec in trace:
        lines.append("\t".join(
            str(rec[c]) if c in ("t", "denoiser") else (f"{rec[c]:.6f}" if c in rec else "") for c in cols))
    return "\n".join(lines) + "\n"


def _emit(writer, cfg, image_id, method, rate, result, truth, runtime):
    """Quantize, score and store one D-AMP recovery."""
    key = _key(image_id, method, rate)
    if result is None:
        writer.add(MetricsRow(image_id, method, rate, float("nan")))
        return
    rec = quantize(result.image).astype(np.float64)
    writer.image(key, rec)
    last = result.trace[-1]
    sigma_true = last.get("sigma_true") if cfg.record_sigma_true else None
    writer.add(MetricsRow(image_id, method, rate, psnr(rec, truth),
                          runtime if cfg.timing else None, last["sigma_hat"], sigma_true))
    if cfg.emit_histograms and result.state.sigma_hat > 0:
        hist = residual_histogram(result.state.pseudo_clean, truth, result.state.sigma_hat)
        writer.text("histograms", key + ".tsv", hist.to_tsv())
    if cfg.record_sigma_true:
        writer.text("traces", key + ".tsv", _trace_tsv(result.trace))


# --- modes ----------------------------------------------------------------

def _per_rate(cfg, data):
    ids = [i for i, _ in data]
    images = [img for _, img in data]
    for rate in cfg.rates:
        op = build_op(cfg, rate, images[0].shape)
        ys = measure_all(op, images, cfg)
        yield rate, op, ids, images, ys


def _mode_recover(cfg, writer):
    data = load_dataset(cfg)
    dcfg = cfg.damp_config()
    blind = load_weights(cfg.weights) if cfg.weights else None
    method = "ldamp" if blind is not None else "damp-fallback"
    for rate, op, ids, images, ys in _per_rate(cfg, data):
        runs = run_all(op, ys, DenoiserBank(blind, HardThresholdDCT()), dcfg, images)
        for k, (res, secs) in enumerate(runs):
            _emit(writer, cfg, ids[k], method, rate, res, images[k], secs)


def _mode_joint(cfg, writer):
    data = load_dataset(cfg)
    dcfg = cfg.damp_config()
    tcfg = cfg.train_config()
    for rate, op, ids, images, ys in _per_rate(cfg, data):
        fb_runs = run_all(op, ys, DenoiserBank(None, HardThresholdDCT()), dcfg, images)
        for k, (res, secs) in enumerate(fb_runs):
            _emit(writer, cfg, ids[k], "damp-fallback", rate, res, images[k], secs)
        fb_images = [None if r is None else r.image for r, _ in fb_runs]

        if cfg.weights:
            init = load_weights(cfg.weights)
        else:
            usable = [img for img in fb_images if img is not None]
            init = pretrain(_blind(cfg), usable, replace(tcfg, seed=cfg.seed + 1), seed=cfg.seed)
        save_weights(init, writer.path("weights", f"pretrained__r{rate:g}.ampw"))

        _, trained, report = joint_loop(ys, op, init, tcfg, dcfg, x_true=images, fallback_images=fb_images)
        save_weights(trained, writer.path("weights", f"sure__r{rate:g}.ampw"))
        lines = ["round\tmean_sigma_hat\tmean_psnr_db\tsubstitutes\ttrained"]
        if report.initial_psnr is not None:
            lines.append(f"0\t\t{report.initial_psnr:.4f}\t\t")
        for r in range(len(report.round_sigma)):
            p = report.round_psnr[r] if r < len(report.round_psnr) else float("nan")
            lines.append(f"{r + 1}\t{report.round_sigma[r]:.6f}\t{p:.4f}\t"
                         f"{report.round_substitutes[r]}\t{int(report.round_trained[r])}")
        writer.text(None, f"rounds__r{rate:g}.tsv", "\n".join(lines) + "\n")
        for k, res in enumerate(report.results):
            _emit(writer, cfg, ids[k], "ldamp-sure", rate, res, images[k], report.runtimes[k])
        for k, res in enumerate(report.initial_results):
            _emit(writer, cfg, ids[k], "ldamp-pretrained", rate, res, images[k], report.initial_runtimes[k])


def _mode_train(cfg, writer):
    data = load_dataset(cfg)
    rng = np.random.default_rng([cfg.seed, 11])
    tcfg = cfg.train_config()
    samples = []
    for _, img in data:
        sigma = float(cfg.sigma_max * (1.0 - rng.random()))
        noisy = img + sigma * rng.standard_normal(img.shape)
        samples.append(TrainingPair(noisy, img, sigma) if cfg.objective == "mse" else TrainingSample(noisy, sigma))
    d = load_weights(cfg.weights) if cfg.weights else _blind(cfg)
    trained = train(d, samples, tcfg, Objective(cfg.objective))
    save_weights(trained, writer.path("weights", f"{cfg.arch}__{cfg.objective}.ampw"))
    writer.text(None, "training_trace.tsv",
                "epoch\tloss\n" + "".join(f"{e}\t{v:.6f}\n" for e, v in enumerate(trained.training_trace)))


def _sure_denoiser(spec):
    name, _, arg = spec.partition(":")
    if name == "identity":
        return Identity()
    if name == "scale":
        return Scale(float(arg or 0.5))
    if name == "softdct":
        return SoftThresholdDCT(k=float(arg)) if arg else SoftThresholdDCT()
    if name == "hardblock":
        return HardThresholdDCT()
    raise ConfigError(f"unknown sure_denoiser {spec!r}")


def _mode_sure_check(cfg, writer):
    data = load_dataset(cfg)
    d = _sure_denoiser(cfg.sure_denoiser)
    lines = ["image_id\tdenoiser\tsigma\ttrials\tmean_sure\tmean_mse\trel_gap\tstd_sure"]
    for k, (image_id, img) in enumerate(data):
        rep = unbiasedness_report(d, img, cfg.sure_sigma, cfg.sure_trials, seed=cfg.seed + k)
        lines.append(f"{image_id}\t{cfg.sure_denoiser}\t{cfg.sure_sigma:g}\t{rep.trials}\t"
                     f"{rep.mean_sure:.4f}\t{rep.mean_mse:.4f}\t{rep.rel_gap:.6f}\t{rep.std_sure:.4f}")
    writer.text(None, "sure_check.tsv", "\n".join(lines) + "\n")


def _mode_eval(cfg, writer):
    if not cfg.recovered:
        raise ConfigError("eval needs 'recovered' (directory of recovered images)")
    data = load_dataset(cfg)
    rate = cfg.rates[0]
    for image_id, truth in data:
        path = None
        for suffix in IMAGE_SUFFIXES:
            p = os.path.join(cfg.recovered, image_id + suffix)
            if os.path.exists(p):
                path = p
                break
        if path is None:
            log.warning("no recovered image for %s", image_id)
            continue
        rec = ingest_image(path)
        writer.add(MetricsRow(image_id, cfg.eval_method, rate, psnr(rec, truth)))


# --- estimator comparison -----------------------------------------------------

@dataclass
class EstimatorReport:
    """Final-iteration noise estimates against the true effective noise."""

    image_ids: list = field(default_factory=list)
    rate: float = 0.0
    sigma_measurement: np.ndarray = None
    sigma_image: np.ndarray = None
    sigma_true: np.ndarray = None
    ks_measurement: np.ndarray = None
    ks_image: np.ndarray = None
    kurtosis_measurement: np.ndarray = None
    kurtosis_image: np.ndarray = None

    @property
    def err_measurement(self):
        return np.abs(self.sigma_measurement - self.sigma_true)

    @property
    def err_image(self):
        return np.abs(self.sigma_image - self.sigma_true)

    @property
    def winners(self):
        return ["image" if a < b else "measurement" if b < a else "tie"
                for a, b in zip(self.err_image, self.err_measurement)]

    def to_tsv(self):
        cols = ["image_id", "sigma_true", "sigma_measurement", "sigma_image", "abs_err_measurement",
                "abs_err_image", "ks_measurement", "ks_image", "winner"]
        lines = ["\t".join(cols)]
        for k, i in enumerate(self.image_ids):
            lines.append("\t".join([i] + [f"{v:.6f}" for v in (
                self.sigma_true[k], self.sigma_measurement[k], self.sigma_image[k], self.err_measurement[k],
                self.err_image[k], self.ks_measurement[k], self.ks_image[k])] + [self.winners[k]]))
        lines.append("\t".join(["mean", f"{self.sigma_true.mean():.6f}", "", "",
                                f"{self.err_measurement.mean():.6f}", f"{self.err_image.mean():.6f}",
                                f"{self.ks_measurement.mean():.6f}", f"{self.ks_image.mean():.6f}", ""]))
        return "\n".join(lines) + "\n"


def compare_estimators(op, images, measurements, dcfg, bank=None, image_ids=None, rate=None, runs=None):
    """Run D-AMP per instance and score both noise estimators at the last iteration.

    Both estimates come from the same trajectory (the one ``dcfg.estimator``
    drives), so only the normalizer differs between them.
    """
    bank = bank or DenoiserBank(None, HardThresholdDCT())
    if runs is None:
        runs = run_all(op, measurements, bank, dcfg, images)
    rep = EstimatorReport(rate=rate if rate is not None else op.rate)
    cols = {k: [] for k in ("sm", "si", "st", "km", "ki", "um", "ui")}
    for k, (res, _) in enumerate(runs):
        if res is None:
            continue
        rep.image_ids.append(image_ids[k] if image_ids else str(k))
        last = res.trace[-1]
        truth = np.asarray(images[k], dtype=np.float64).reshape(-1)
        cols["sm"].append(last["sigma_measurement"])
        cols["si"].append(last["sigma_image"])
        cols["st"].append(float(np.std(res.state.pseudo_clean - truth)))
        hm = residual_histogram(res.state.pseudo_clean, truth, max(last["sigma_measurement"], 1e-12))
        hi = residual_histogram(res.state.pseudo_clean, truth, max(last["sigma_image"], 1e-12))
        cols["km"].append(hm.ks_statistic)
        cols["ki"].append(hi.ks_statistic)
        cols["um"].append(hm.excess_kurtosis)
        cols["ui"].append(hi.excess_kurtosis)
    rep.sigma_measurement = np.array(cols["sm"])
    rep.sigma_image = np.array(cols["si"])
    rep.sigma_true = np.array(cols["st"])
    rep.ks_measurement = np.array(cols["km"])
    rep.ks_image = np.array(cols["ki"])
    rep.kurtosis_measurement = np.array(cols["um"])
    rep.kurtosis_image = np.array(cols["ui"])
    return rep


def _mode_compare(cfg, writer):
    data = load_dataset(cfg)
    dcfg = cfg.damp_config()
    for rate, op, ids, images, ys in _per_rate(cfg, data):
        runs = run_all(op, ys, DenoiserBank(None, HardThresholdDCT()), dcfg, images)
        rep = compare_estimators(op, images, ys, dcfg, image_ids=ids, rate=rate, runs=runs)
        writer.text(None, f"estimators__r{rate:g}.tsv", rep.to_tsv())
        for k, (res, secs) in enumerate(runs):
            if res is None:
                continue
            rec = quantize(res.image).astype(np.float64)
            p = psnr(rec, images[k])
            last = res.trace[-1]
            sigma_true = float(np.std(res.state.pseudo_clean - images[k].reshape(-1)))
            t = secs if cfg.timing else None
            writer.add(MetricsRow(ids[k], "sigma-measurement", rate, p, t, last["sigma_measurement"], sigma_true))
            writer.add(MetricsRow(ids[k], "sigma-image", rate, p, t, last["sigma_image"], sigma_true))


_DISPATCH = {
    "recover": _mode_recover,
    "train": _mode_train,
    "joint": _mode_joint,
    "compare-estimators": _mode_compare,
    "sure-check": _mode_sure_check,
    "eval": _mode_eval,
}


def run_experiment(cfg, mode="recover"):
    """Run one mode and write its outputs; returns the process exit code.

    Library errors propagate as :class:`~ampsure.errors.AmpSureError`; the CLI
    turns them into a nonzero exit with a structured message.
    """
    if mode not in _DISPATCH:
        raise ConfigError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    writer = Writer(cfg)
    _DISPATCH[mode](cfg, writer)
    writer.finish()
    return 0


def config_dict(cfg):
    return dataclasses.asdict(cfg)


def describe_error(exc):
    """One-line ``error=<Type> message=<text>`` record for stderr."""
    kind = type(exc).__name__ if isinstance(exc, AmpSureError) else "InternalError"
    return f"error={kind} message={str(exc)!r}"
