"""Seeded experiment harness producing CSV tables.

Every table is written with a comment header (schema version, config
hash, master seed, units) followed by a column row; floats carry nine
significant digits and no wall-clock quantity is ever written, so a
fixed config and seed give identical bytes on every run. Monte-Carlo
experiments write the per-realization rows next to their aggregates so
the means and standard deviations can be recomputed from the raw file.

Realization ``r`` of a run draws its channel from ``(seed, r)`` and its
randomization stream from a child of the same key, so the rows do not
depend on execution order and can be computed by a process pool.
"""

import csv
import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import ContractError
from .beamforming import alternating_optimize
from .beamforming.iterative import initial_impedance
from .channel import generate_channel_set
from .config import SCHEMA_VERSION
from .rectenna import papr
from .ris import scattering_from_impedance, total_channel
from .waveform import it_wf, smf_init

ALGORITHM_ALIASES = {"dris": "dris-sdr"}
TABLE_I_SETUPS = ((4, 8), (8, 4), (8, 8), (12, 8))


@dataclass
class Table:
    """Named CSV table: column names, rows of values and the units note."""

    name: str
    columns: tuple
    rows: list = field(default_factory=list)
    units: str = ""

    def column(self, name):
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def where(self, **match):
        idx = {k: self.columns.index(k) for k in match}
        return [row for row in self.rows if all(row[idx[k]] == v for k, v in match.items())]


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.9g" % value
    return str(value)


def write_csv(table, path, config):
    """Write ``table`` to ``path`` with the reproducibility header."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        fh.write(f"# table={table.name}\n")
        fh.write(f"# config_hash={config.config_hash()}\n")
        fh.write(f"# seed={config.seed}\n")
        if table.units:
            fh.write(f"# units: {table.units}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """Parse a table written by :func:`write_csv`; returns ``(meta, Table)`` with string cells."""
    meta = {}
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, Table(meta.get("table", ""), tuple(rows[0]), rows[1:])


def save_tables(tables, config, out_dir=None):
    out_dir = out_dir or config.out_dir
    return [write_csv(t, os.path.join(out_dir, f"{t.name}.csv"), config) for t in tables]


# ---------------------------------------------------------------------------
# per-realization runner


def algorithm_kind(name):
    return ALGORITHM_ALIASES.get(name, name)


def realization_seed(seed, realization):
    return int(np.random.SeedSequence([int(seed), int(realization), 0xA17]).generate_state(1)[0])


def run_realization(config, kind, realization):
    """Optimize one channel realization of ``config`` with beamformer ``kind``."""
    ch = generate_channel_set(config, config.seed, realization)
    bf = dataclasses.replace(config.beamformer, kind=algorithm_kind(kind))
    return alternating_optimize(ch.h_I, ch.h_R, config.P_T, bf, config.waveform, config.rectifier, ch.h_D,
                                realization_seed(config.seed, realization))


def _job(args):
    config, kind, realization = args
    return run_realization(config, kind, realization)


def run_many(jobs, workers=1):
    """Run ``(config, kind, realization)`` jobs in order; results keep the job order."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_job, jobs))
    return [_job(j) for j in jobs]


def _mean_std(values):
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def _aggregate(raw, keys, value="i_dc", name=None):
    """Group ``raw`` rows by ``keys`` (in first-seen order) into mean/std/count rows."""
    idx = [raw.columns.index(k) for k in keys]
    j = raw.columns.index(value)
    groups = {}
    for row in raw.rows:
        groups.setdefault(tuple(row[i] for i in idx), []).append(row[j])
    agg = Table(name or raw.name.replace("_raw", "") + "_summary", tuple(keys) + (f"mean_{value}", f"std_{value}", "count"),
                units=raw.units)
    for key, vals in groups.items():
        agg.rows.append(key + _mean_std(vals) + (len(vals),))
    return agg


# ---------------------------------------------------------------------------
# experiments


def run_convergence(config, algorithms=("sdr", "sca", "it"), cells=((4, 2), (8, 4)), include_waveform=True):
    """Per-iteration DC current of every algorithm on one realization per (M, N) cell.

    Outer-loop rows have ``loop = outer``; the impedance iterations of the
    iterative algorithm are added with ``loop = inner`` and the stand-alone
    waveform iteration at Theta = j I as algorithm ``it-wf``.
    """
    table = Table("convergence", ("algorithm", "M", "N", "loop", "iteration", "i_dc"), units="i_dc in A")
    for M, N in cells:
        cfg = config.replace(M=M, N=N)
        if include_waveform:
            ch = generate_channel_set(cfg, cfg.seed, 0)
            theta = scattering_from_impedance(initial_impedance(M, cfg.beamformer.Z0), cfg.beamformer.Z0)
            h = total_channel(theta, ch.h_R, ch.h_I, ch.h_D)
            res = it_wf(h, cfg.P_T, cfg.waveform, cfg.rectifier, smf_init(h, cfg.P_T, cfg.waveform.beta))
            table.rows.extend(("it-wf", M, N, "outer", i, v) for i, v in enumerate(res.trace))
        for alg in algorithms:
            report = run_realization(cfg, alg, 0)
            table.rows.extend((alg, M, N, "outer", i, v) for i, v in enumerate(report.trace))
            table.rows.extend((alg, M, N, "inner", i + 1, v) for i, v in enumerate(report.inner_trace))
    return [table]


def _sweep(config, axis, values, algorithms, workers, name):
    raw = Table(f"{name}_raw", ("algorithm", "M", "N", "realization", "i_dc", "dominance_ratio"), units="i_dc in A")
    for v in values:
        cfg = config.replace(**{axis: v})
        for alg in algorithms:
            reports = run_many([(cfg, alg, r) for r in range(cfg.realizations)], workers)
            for r, rep in enumerate(reports):
                dr = rep.dominance_ratio if rep.dominance_ratio is not None else float("nan")
                raw.rows.append((alg, cfg.M, cfg.N, r, rep.idc, dr))
    return [raw, _aggregate(raw, ("algorithm", "M", "N"), name=f"{name}_summary")]


def sweep_m(config, M_list=(4, 8, 12, 16), algorithms=("sdr", "it"), workers=1):
    """Mean/std of the DC current against the surface size."""
    return _sweep(config, "M", M_list, algorithms, workers, "sweep_m")


def sweep_n(config, N_list=(1, 2, 4, 8), algorithms=("sdr", "it"), workers=1):
    """Mean/std of the DC current against the number of subcarriers."""
    return _sweep(config, "N", N_list, algorithms, workers, "sweep_n")


def _envelope(y, plan, samples):
    t = np.arange(samples) / (samples * plan.delta_f)
    phase = np.exp(2j * np.pi * np.outer(t, np.arange(plan.N) * plan.delta_f))
    return t, np.abs(phase @ y)


def waveform_report(config, alphas=(0.1, 1.0, 10.0), powers_dbm=(30.0, 50.0), M=32, N=8, kappa=0.0,
                    algorithm="it", oversampling=16, realization=0):
    """Per-subcarrier gains, power allocation, PAPR and time envelopes of one realization.

    Gains are normalized by their largest subcarrier value; the waveform
    column ``power_fraction`` is |s_n|^2 / (2 P_T). The time table holds
    the envelope of the received baseband signal over one period.
    """
    freq = Table("waveform_gains", ("alpha", "P_T_dBm", "subcarrier", "gain_h_I", "gain_h_R", "gain_cascade",
                                    "gain_s", "power_fraction"), units="gains normalized to max over subcarriers")
    summary = Table("waveform_summary", ("alpha", "P_T_dBm", "papr_db", "max_power_fraction", "active_subcarriers",
                                         "i_dc"), units="papr in dB; i_dc in A; active = power_fraction >= 1/(4N)")
    time = Table("waveform_time", ("alpha", "P_T_dBm", "t", "envelope"), units="t in s; envelope in sqrt(W)")
    for alpha in alphas:
        for p_dbm in powers_dbm:
            cfg = config.replace(M=M, N=N, kappa=kappa, alpha=alpha, P_T_dBm=p_dbm)
            rep = run_realization(cfg, algorithm, realization)
            ch_I = np.linalg.norm(rep.h_I, axis=1)
            ch_R = np.linalg.norm(rep.h_R, axis=1)
            casc = np.abs(rep.cascade)
            amp = np.abs(rep.waveform)
            frac = amp**2 / (2 * cfg.P_T)
            for n in range(N):
                freq.rows.append((alpha, p_dbm, n + 1, ch_I[n] / ch_I.max(), ch_R[n] / ch_R.max(), casc[n] / casc.max(),
                                  amp[n] / amp.max(), frac[n]))
            summary.rows.append((alpha, p_dbm, papr(rep.waveform, rep.cascade, cfg.carrier), float(frac.max()),
                                 int(np.sum(frac >= 1 / (4 * N))), rep.idc))
            t, env = _envelope(rep.waveform * rep.cascade, cfg.carrier, oversampling * N)
            time.rows.extend((alpha, p_dbm, ti, ei) for ti, ei in zip(t, env))
    return [freq, summary, time]


CHANNEL_TYPES = {"los": math.inf, "rician": 1.0, "nlos": 0.0}


def compare_architectures(config, M_list=(4, 8, 16), N_list=(1, 2, 4, 8), channels=("los", "rician"), workers=1):
    """D-RIS versus fully connected BD-RIS (SDR) against M (at the config N) and N (at the config M)."""
    raw = Table("compare_raw", ("channel", "sweep", "architecture", "M", "N", "realization", "i_dc"), units="i_dc in A")
    for ch_name in channels:
        if ch_name not in CHANNEL_TYPES:
            raise ContractError(f"unknown channel type {ch_name!r}; expected one of {sorted(CHANNEL_TYPES)}")
        base = config.replace(kappa=CHANNEL_TYPES[ch_name])
        points = [("M", base.replace(M=m)) for m in M_list] + [("N", base.replace(N=n)) for n in N_list]
        for sweep, cfg in points:
            for arch, alg in (("D-RIS", "dris-sdr"), ("BD-RIS", "sdr")):
                reports = run_many([(cfg, alg, r) for r in range(cfg.realizations)], workers)
                raw.rows.extend((ch_name, sweep, arch, cfg.M, cfg.N, r, rep.idc) for r, rep in enumerate(reports))
    return [raw, _aggregate(raw, ("channel", "sweep", "architecture", "M", "N"), name="compare_summary")]


def dr_table(config, setups=TABLE_I_SETUPS, realizations=5, kappa=0.0):
    """DC current and dominance ratio of the rank-penalized and the plain relaxation."""
    raw = Table("dr_raw", ("setup", "M", "N", "realization", "algorithm", "i_dc", "dominance_ratio"), units="i_dc in A")
    for M, N in setups:
        cfg = config.replace(M=M, N=N, kappa=kappa, realizations=realizations)
        for r in range(realizations):
            for alg in ("sdp", "sdr"):
                rep = run_realization(cfg, alg, r)
                raw.rows.append((f"M={M} N={N}", M, N, r, alg, rep.idc, rep.dominance_ratio))
    agg = Table("dr_summary", ("setup", "algorithm", "mean_i_dc", "mean_dominance_ratio", "min_dominance_ratio",
                               "max_dominance_ratio", "count"), units="i_dc in A")
    for M, N in setups:
        for alg in ("sdp", "sdr"):
            rows = raw.where(setup=f"M={M} N={N}", algorithm=alg)
            drs = [row[6] for row in rows]
            agg.rows.append((f"M={M} N={N}", alg, float(np.mean([row[5] for row in rows])), float(np.mean(drs)),
                             float(min(drs)), float(max(drs)), len(rows)))
    return [raw, agg]


EXPERIMENTS = {
    "run-convergence": run_convergence,
    "sweep-m": sweep_m,
    "sweep-n": sweep_n,
    "waveform-report": waveform_report,
    "compare-ris": compare_architectures,
    "dr-table": dr_table,
}

