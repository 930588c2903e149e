"""Command-line front end.

Every subcommand reads flags and/or a JSON config (``--config``); flags win
over config keys, which use the flag names with underscores. Results go to
``--output`` (stdout by default) as CSV or JSON. Failures exit with status 2
and print a JSON error object to stderr.
"""

import argparse
import functools
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
from scipy import constants as _c

from . import born, coherence, delta1d, kinematics, potentials, rutherford, sampler
from .errors import ConfigError, ScatteringError
from .units import MEV, UnitSystem

log = logging.getLogger("cohscat")

LOG_ENV = "COHSCAT_LOG_LEVEL"
SUBCOMMANDS = ("delta1d", "born", "coherence", "rutherford", "sample", "table1")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, op="cli.parse")


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def csv_text(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def json_text(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_atomic(path, text):
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text):
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        write_atomic(args.output, text)


def _floats(text, op):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}", op=op) from None


def _grid(spec, op):
    """Parse ``start:stop:num`` into a linspace."""
    try:
        start, stop, num = str(spec).split(":")
        return np.linspace(float(start), float(stop), int(num))
    except ValueError:
        raise ConfigError(f"expected start:stop:num, got {spec!r}", op=op) from None


class Settings:
    """Flag values backed by config-file values and defaults."""

    def __init__(self, args, config):
        self._args = args
        self._config = {k.replace("-", "_"): v for k, v in config.items()}

    def get(self, name, default=None):
        value = getattr(self._args, name, None)
        if value is not None and value is not False:
            return value
        return self._config.get(name, default)

    @property
    def format(self):
        fmt = self.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {fmt!r}", op="cli.run")
        return fmt


def _load_config(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", op="cli.config") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}", op="cli.config") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", op="cli.config")
    return data


# --------------------------------------------------------------------- delta1d

def _cmd_delta1d(s):
    op = "cli.delta1d"
    beta, ka = s.get("beta"), s.get("ka")
    if beta is not None or ka is not None:
        if beta is None or ka is None:
            raise ConfigError("--beta and --ka go together", op=op)
        arr = delta1d.DeltaArray.two_delta(float(beta), float(ka))
        ks = np.array([1.0])
    else:
        sites = s.get("sites")
        if sites is None:
            raise ConfigError("give --beta/--ka or --sites", op=op)
        if isinstance(sites, str):
            try:
                sites = [tuple(float(v) for v in item.split(":")) for item in sites.split(",") if item]
            except ValueError:
                raise ConfigError(f"sites must look like x:alpha,x:alpha, got {sites!r}", op=op) from None
        if any(len(site) != 2 for site in sites):
            raise ConfigError("each site needs a position and a strength", op=op)
        arr = delta1d.DeltaArray.from_sites(sites, float(s.get("mass", 1.0)))
        k = s.get("k")
        if k is not None:
            ks = np.array(_floats(k, op) if isinstance(k, str) else np.atleast_1d(k), dtype=float)
        else:
            ks = _grid(s.get("k_grid", "0.1:10:100"), op)
    solver = s.get("solver", "tm")
    if solver == "tm":
        amp = delta1d.transfer_matrix_solve(arr, ks)
        R, T = amp.R, amp.T
    elif solver == "bc":
        amps = [delta1d.boundary_condition_solve(arr, k) for k in ks]
        R = np.array([a.R for a in amps])
        T = np.array([a.T for a in amps])
    else:
        raise ConfigError(f"unknown solver {solver!r}", op=op)
    if s.format == "json":
        return json_text({"rows": [{"k": k, "R": r, "T": t} for k, r, t in zip(ks, R, T)],
                          "sites": list(zip(arr.positions, arr.strengths)), "mass": arr.mass})
    return csv_text(["k", "R", "T"], zip(ks, R, T))


# ------------------------------------------------------------------------ born

@functools.cache
def _nuclear():
    return UnitSystem.nuclear()


def _convert(value, dimension, units):
    """Convert a CLI value in the named unit convention to internal units."""
    if units == "internal":
        return value
    u = _nuclear()
    si = {
        "mass": MEV / _c.c**2,
        "momentum": MEV / _c.c,
        "energy": MEV,
        "length": 1e-15,
        "coupling": MEV * 1e-15,
        "wavenumber": 1e15,
    }[dimension]
    return u.to_internal(value * si, dimension)


def _potential(s, units):
    op = "cli.born"
    spec = s.get("potential")
    if spec is None:
        raise ConfigError("--potential is required", op=op)
    if isinstance(spec, dict):
        # parameters are internal unless the mapping says "units": "si"
        return potentials.potential_from_dict(spec, units=_nuclear())
    kind = str(spec).lower()
    g = _convert(float(s.get("g", 1.0)), "coupling", units)
    if kind == "coulomb":
        return potentials.Coulomb(g)
    if kind == "yukawa":
        return potentials.Yukawa(g, _convert(float(s.get("mu", 1.0)), "wavenumber", units))
    if kind == "gaussian":
        return potentials.Gaussian(_convert(float(s.get("V0", 1.0)), "energy", units),
                                   _convert(float(s.get("width", 1.0)), "length", units))
    raise ConfigError(f"unknown potential {spec!r}", op=op)


def _kinematics(s, units):
    if s.get("E_r") is not None:
        return kinematics.relative_kinematics(_convert(float(s.get("m_r", 1.0)), "mass", units),
                                              _convert(float(s.get("E_r")), "energy", units))
    return kinematics.make_kinematics(
        _convert(float(s.get("m_d", 1.0)), "mass", units),
        _convert(float(s.get("M", 1.0)), "mass", units),
        (0.0, 0.0, _convert(float(s.get("p_d", 1.0)), "momentum", units)),
    )


def _theta_grid(s, op, default):
    theta = s.get("theta")
    if theta is not None:
        vals = _floats(theta, op) if isinstance(theta, str) else np.atleast_1d(theta).tolist()
        return np.asarray(vals, dtype=float)
    return _grid(s.get("theta_grid", default), op)


def _cmd_born(s):
    op = "cli.born"
    units = s.get("units", "internal")
    if units not in ("internal", "nuclear"):
        raise ConfigError(f"unknown units {units!r}", op=op)
    pot = _potential(s, units)
    kin = _kinematics(s, units)
    theta = _theta_grid(s, op, f"{math.pi / 36}:{math.pi}:36")
    target = s.get("target")
    if target is not None:
        if isinstance(target, str):
            target = _load_config(target)
        try:
            cons = [born.Constituent(float(c["charge"]),
                                     tuple(_convert(float(x), "length", units)
                                           for x in c.get("position", (0, 0, 0))),
                                     _convert(float(c.get("spread", 0.0)), "length", units))
                    for c in target["constituents"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed target: {exc}", op=op) from None
        tgt = born.GaussianTarget(tuple(cons))
        table = born.cross_section_table(pot, kin, theta, target=tgt)
        extent = s.get("extent")
        extent = _convert(float(extent), "length", units) if extent is not None else tgt.size
    else:
        G = float(s.get("G", 1.0))
        table = born.cross_section_table(pot, kin, theta, G=G)
        extent = s.get("extent")
        extent = _convert(float(extent), "length", units) if extent is not None else None
    validity = None
    if extent:
        bv = coherence.born_validity(pot, kin, extent)
        validity = {"verdict": bv.verdict.value, "ratio": bv.ratio, "extent": extent}
        if bv.verdict is not coherence.Validity.VALID:
            log.warning("Born approximation is %s here (ratio %.3g)", bv.verdict.value, bv.ratio)
    area = 1.0
    if units == "nuclear":
        area = _nuclear().scale("area") / 1e-30  # internal area -> fm^2
    meta = dict(table.metadata, units=units, born_validity=validity,
                area_unit="fm^2" if units == "nuclear" else "internal")
    values = table.values * area
    if s.format == "json":
        return json_text({"metadata": meta, "rows": [
            {"theta": t, "dsigma_dcostheta": v, "kernel_ratio": r}
            for t, v, r in zip(table.theta, values, table.kernel_ratio)]})
    text = csv_text(["theta", "dsigma_dcostheta", "kernel_ratio"],
                    zip(table.theta, values, table.kernel_ratio))
    meta_path = s.get("metadata")
    if meta_path:
        write_atomic(meta_path, json_text(meta))
    return text


# ------------------------------------------------------------------- coherence

def _packet(d, op):
    try:
        return coherence.WavePacket(float(d["mean_momentum"]), float(d["momentum_spread"]),
                                    None if d.get("position_spread") is None
                                    else float(d["position_spread"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed packet: {exc}", op=op) from None


def _verdict(v):
    out = {"coherent": v.coherent, "ratio": v.ratio, "epsilon": v.epsilon}
    if v.position_spread is not None:
        out["position_spread"] = v.position_spread
    if v.second_moment is not None:
        out["second_moment"] = v.second_moment
    return out


def _cmd_coherence(s):
    op = "cli.coherence"
    L = s.get("L")
    if L is None:
        raise ConfigError("target size L is required", op=op)
    L = float(L)
    eps = float(s.get("epsilon", coherence.DEFAULT_EPSILON))
    result = {"L": L, "epsilon": eps}
    if s.get("p_r") is not None:
        result["plane_wave"] = _verdict(coherence.plane_wave_coherent(float(s.get("p_r")), L, eps))
    packet = s.get("packet")
    if s.get("mean_momentum") is not None or s.get("momentum_spread") is not None:
        packet = {"mean_momentum": s.get("mean_momentum", 0.0),
                  "momentum_spread": s.get("momentum_spread", 0.0),
                  "position_spread": s.get("position_spread")}
    if packet is not None:
        result["packet"] = _verdict(coherence.packet_coherent(_packet(packet, op), L, eps))
    members = s.get("ensemble")
    if members is not None:
        try:
            ens = coherence.PacketEnsemble(tuple(float(m["weight"]) for m in members),
                                           tuple(_packet(m, op) for m in members))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed ensemble: {exc}", op=op) from None
        result["ensemble"] = _verdict(coherence.ensemble_coherent(ens, L, eps))
        if all(m.position_spread is not None for m in ens.members):
            chk = coherence.small_packet_decomposition_violates(ens, L)
            result["small_packet_decomposition"] = {
                "holds": chk.holds, "applicable": chk.applicable,
                "second_moment": chk.second_moment, "bound": chk.bound}
    if len(result) == 2:
        raise ConfigError("nothing to check: give p_r, a packet or an ensemble", op=op)
    if s.format == "csv":
        rows = [(name, v["coherent"], v["ratio"]) for name, v in result.items()
                if isinstance(v, dict) and "coherent" in v]
        return csv_text(["check", "coherent", "ratio"], rows)
    return json_text(result)


# ------------------------------------------------------------------ rutherford

def _table1_text(s):
    records = rutherford.load_table1(s.get("table1_path"))
    analysis = rutherford.table1_analysis(records)
    if s.format == "json":
        return json_text({
            "rows": [{"material": r.material, "A": r.A, "Z": r.Z, "N_scint": r.N_scint,
                      "statistic": stat, "rounded": round(stat, 2)}
                     for r, (_, stat) in zip(records, analysis.rows)],
            "mean": analysis.mean,
            "max_deviation": analysis.max_deviation,
            "spread_excluding_aluminum": analysis.spread(exclude=("Aluminum",)),
        })
    return csv_text(["material", "A", "Z", "N_scint", "statistic", "rounded"],
                    [(r.material, r.A, r.Z, r.N_scint, stat, f"{stat:.2f}")
                     for r, (_, stat) in zip(records, analysis.rows)])


def _cmd_rutherford(s):
    op = "cli.rutherford"
    if s.get("table1"):
        return _table1_text(s)
    Z, energy = s.get("Z"), s.get("energy")
    if Z is None or energy is None:
        raise ConfigError("give --table1, or --Z and --energy", op=op)
    theta = _theta_grid(s, op, f"{math.pi / 12}:{math.pi}:24")
    xs = rutherford.rutherford_differential(int(Z), float(energy) * MEV, theta)
    xs = np.atleast_1d(xs)
    if s.format == "json":
        return json_text({"Z": int(Z), "energy_MeV": float(energy), "area_unit": "m^2",
                          "rows": [{"theta": t, "dsigma_dcostheta": v} for t, v in zip(theta, xs)]})
    return csv_text(["theta", "dsigma_dcostheta"], zip(theta, xs))


# ---------------------------------------------------------------------- sample

def _read_table(path):
    op = "cli.sample"
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read table: {exc}", op=op) from None
    header = lines[0].split(",") if lines else []
    try:
        ti, vi = header.index("theta"), header.index("dsigma_dcostheta")
        rows = [line.split(",") for line in lines[1:] if line.strip()]
        theta = [float(r[ti]) for r in rows]
        values = [float(r[vi]) for r in rows]
    except (ValueError, IndexError):
        raise ConfigError("table needs theta and dsigma_dcostheta columns", op=op) from None
    return born.CrossSectionTable(theta, values)


def _cmd_sample(s):
    count = int(s.get("count", 1000))
    seed = int(s.get("seed", 0))
    streams = int(s.get("streams", 1))
    workers = s.get("workers")
    table_path = s.get("table")
    if table_path:
        table = _read_table(table_path)
        angles = sampler.sample_general(table, count, seed, streams, workers)
        theta_min = float(table.theta[0])
    else:
        theta_min = float(s.get("theta_min", math.pi / 6))
        spec = sampler.AngularSampleSpec(theta_min, count, seed)
        angles = sampler.sample_rutherford(spec, streams, workers)
    if s.format == "json":
        bins = int(s.get("bins", 30))
        edges, counts = sampler.histogram_cos(angles, theta_min, bins)
        return json_text({"count": count, "seed": seed, "streams": streams,
                          "theta_min": theta_min, "cos_edges": edges, "counts": counts})
    return csv_text(["theta"], ((a,) for a in angles))


# ------------------------------------------------------------------------ main

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for any flag")
    common.add_argument("--output", "-o", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    parser = _Parser(prog="cohscat", description="Coherent scattering calculations.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("delta1d", parents=[common], help="1D delta-array reflectivity")
    p.add_argument("--beta", type=float)
    p.add_argument("--ka", type=float)
    p.add_argument("--sites", help="x:alpha,x:alpha,...")
    p.add_argument("--mass", type=float)
    p.add_argument("--k", help="comma-separated wave numbers")
    p.add_argument("--k-grid", dest="k_grid", help="start:stop:num")
    p.add_argument("--solver", choices=("tm", "bc"))

    p = sub.add_parser("born", parents=[common], help="Born differential cross section")
    p.add_argument("--potential", help="coulomb, yukawa or gaussian")
    p.add_argument("--g", type=float, help="potential coupling")
    p.add_argument("--mu", type=float, help="Yukawa inverse screening length")
    p.add_argument("--V0", type=float, help="Gaussian depth")
    p.add_argument("--width", type=float, help="Gaussian width")
    p.add_argument("--G", type=float, help="total target coupling (point target)")
    p.add_argument("--target", help="JSON file describing target constituents")
    p.add_argument("--m-d", dest="m_d", type=float)
    p.add_argument("--M", type=float)
    p.add_argument("--p-d", dest="p_d", type=float, help="incident momentum, target at rest")
    p.add_argument("--m-r", dest="m_r", type=float)
    p.add_argument("--E-r", dest="E_r", type=float)
    p.add_argument("--theta", help="comma-separated angles in radians")
    p.add_argument("--theta-grid", dest="theta_grid", help="start:stop:num in radians")
    p.add_argument("--extent", type=float, help="potential range for the Born-validity check")
    p.add_argument("--units", choices=("internal", "nuclear"))
    p.add_argument("--metadata", help="write JSON metadata here (CSV output)")

    p = sub.add_parser("coherence", parents=[common], help="coherence predicates")
    p.add_argument("--L", type=float, help="target size")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--p-r", dest="p_r", type=float)
    p.add_argument("--mean-momentum", dest="mean_momentum", type=float)
    p.add_argument("--momentum-spread", dest="momentum_spread", type=float)
    p.add_argument("--position-spread", dest="position_spread", type=float)

    for name in ("rutherford", "table1"):
        p = sub.add_parser(name, parents=[common],
                           help="Rutherford cross sections" if name == "rutherford"
                           else "Table I scintillation analysis")
        if name == "rutherford":
            p.add_argument("--table1", action="store_true")
            p.add_argument("--Z", type=int)
            p.add_argument("--energy", type=float, help="alpha energy in MeV")
            p.add_argument("--theta", help="comma-separated angles in radians")
            p.add_argument("--theta-grid", dest="theta_grid", help="start:stop:num in radians")
        p.add_argument("--table1-path", dest="table1_path", help="override the bundled table")

    p = sub.add_parser("sample", parents=[common], help="Monte Carlo scattering angles")
    p.add_argument("--theta-min", dest="theta_min", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--streams", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--table", help="CSV table (theta, dsigma_dcostheta) to sample from")
    p.add_argument("--bins", type=int, help="histogram bins for JSON output")
    return parser


_COMMANDS = {
    "delta1d": _cmd_delta1d,
    "born": _cmd_born,
    "coherence": _cmd_coherence,
    "rutherford": _cmd_rutherford,
    "table1": _table1_text,
    "sample": _cmd_sample,
}


def _error(exc):
    sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
    return 2


def main(argv=None):
    level = getattr(logging, os.environ.get(LOG_ENV, "WARNING").upper(), logging.WARNING)
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    log.setLevel(level)
    parser = build_parser()
    command = None
    try:
        args = parser.parse_args(argv)
        command = args.command
        if args.command is None:
            raise ConfigError(f"a subcommand is required: {', '.join(SUBCOMMANDS)}", op="cli.parse")
        settings = Settings(args, _load_config(args.config))
        text = _COMMANDS[args.command](settings)
        _emit(args, text)
    except ScatteringError as exc:
        return _error(exc)
    except (TypeError, ValueError) as exc:
        # badly typed config values surface here rather than in argparse
        return _error(ConfigError(str(exc), op=f"cli.{command or 'parse'}"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
