"""Config-driven pipeline driver.

Subcommands: simulate, estimate, select, embed, bound, forecast, validate.
The config is a single flat JSON object with one section per module; every
artifact written embeds the sha256 of the config file and the effective rng
seed so runs can be traced and reproduced. Forecast and validate also render
SVG figures next to their delimited outputs.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import report
from .bounds import (
    admissible_s_grid,
    bound_gibbs_typeI,
    bound_gibbs_typeII,
    bound_typeI_erm,
    bound_typeI_general,
    bound_typeII,
    bound_typeII_erm,
    chisq_plus_one_dirac_uniform,
    kl_dirac_uniform,
    validate_exp_inequality,
)
from .embed import EmbeddingSpec, build_training_set, cone_offsets, \
    forecast_features, select_a_t
from .errors import ConecastError, InvalidConfigError
from .estimate import estimate_parameters
from .field_sim import RasterCube, SimConfig, simulate_stou
from .learn import GIBBS_PROPOSAL_CAP, ensemble_forecast
from .levy import seed_from_dict
from .moments import StouModel
from .rng import RandomStream
from .theta import ThetaDecay, theta_lex_stou

__all__ = ["main", "forecast_pipeline", "validate_pipeline"]

_FLOAT_FMT = ".17g"


# ---------------------------------------------------------------------------
# config plumbing


def _load_config(path):
    raw = Path(path).read_bytes()
    try:
        cfg = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidConfigError(f"config does not parse: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidConfigError("config must be a JSON object")
    return cfg, hashlib.sha256(raw).hexdigest()


def _section(cfg, name, required=True):
    sec = cfg.get(name)
    if sec is None:
        if required:
            raise InvalidConfigError(f"config is missing the {name!r} section")
        return {}
    if not isinstance(sec, dict):
        raise InvalidConfigError(f"config section {name!r} must be an object")
    return dict(sec)


def _model_from_config(cfg):
    sec = _section(cfg, "model")
    try:
        seed_cfg = sec["seed"]
    except KeyError as exc:
        raise InvalidConfigError("model section needs a seed") from exc
    return StouModel(
        mean_reversion=float(sec["mean_reversion"]),
        cone_speed=float(sec["cone_speed"]),
        seed=seed_from_dict(seed_cfg),
    )


def _sim_config_from(cfg, seed_override=None):
    sec = _section(cfg, "simulate")
    seed = sec.get("rng_seed", 0) if seed_override is None else seed_override
    return SimConfig(
        model=_model_from_config(cfg),
        dt=float(sec["dt"]),
        dx=float(sec["dx"]),
        n_t=int(sec["n_t"]),
        n_x=int(sec["n_x"]),
        t0=float(sec.get("t0", 0.0)),
        x0=float(sec.get("x0", 0.0)),
        tail_tol=float(sec.get("tail_tol", 1e-4)),
        rng_seed=int(seed),
        max_cells=int(sec.get("max_cells", 50_000_000)),
    )


def _decay_from_cfg(sec):
    return ThetaDecay(
        kind=sec["kind"],
        prefactor=float(sec.get("prefactor", 1.0)),
        rate=float(sec["rate"]),
    )


# ---------------------------------------------------------------------------
# artifacts


def _provenance(config_hash, rng_seed):
    return {"config_sha256": config_hash, "rng_seed": rng_seed}


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(payload, fp, sort_keys=True, indent=2, ensure_ascii=False)
        fp.write("\n")
    return str(path)


def _csv_header(comment_lines, provenance):
    head = [f"# config_sha256={provenance['config_sha256']} "
            f"rng_seed={provenance['rng_seed']}"]
    head.extend(f"# {line}" for line in comment_lines)
    return head


def write_cube_csv(path, cube, provenance):
    """Delimited cube dump: integer frame index, then one column per pixel."""
    lines = _csv_header(
        ["columns: frame_index, then pixel values left to right",
         f"time = {cube.t0!r} + frame_index*{cube.dt!r}; "
         f"position = {cube.x0!r} + pixel_index*{cube.dx!r}"],
        provenance,
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        for line in lines:
            fp.write(line + "\n")
        for r in range(cube.n_t):
            row = ",".join(format(v, _FLOAT_FMT) for v in cube.values[r])
            fp.write(f"{r},{row}\n")
    return str(path)


def read_cube_csv(path):
    """Read a cube written by write_cube_csv, using its JSON sidecar."""
    path = Path(path)
    meta_path = path.with_suffix(".json")
    if not meta_path.exists():
        raise InvalidConfigError(f"cube sidecar {meta_path} not found")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return RasterCube(
        values=data[:, 1:],
        dt=float(meta["dt"]),
        dx=float(meta["dx"]),
        t0=float(meta.get("t0", 0.0)),
        x0=float(meta.get("x0", 0.0)),
    )


def _cube_meta(cube, model, provenance):
    seed = model.seed
    seed_dict = {"kind": "gaussian", "mu": seed.mu, "sigma": seed.sigma} \
        if hasattr(seed, "sigma") else \
        {"kind": "nig", "alpha": seed.alpha, "beta": seed.beta,
         "mu": seed.mu, "delta": seed.delta}
    return {
        "dt": cube.dt, "dx": cube.dx, "t0": cube.t0, "x0": cube.x0,
        "n_t": cube.n_t, "n_x": cube.n_x,
        "model": {
            "mean_reversion": model.mean_reversion,
            "cone_speed": model.cone_speed,
            "seed": seed_dict,
        },
        "provenance": provenance,
    }


# ---------------------------------------------------------------------------
# shared pipeline pieces


def _get_cube(cfg, seed_override):
    """Cube from the configured CSV path, or a fresh simulation."""
    est = _section(cfg, "estimate", required=False)
    cube_path = est.get("cube")
    if cube_path:
        cube = read_cube_csv(cube_path)
        sec = _section(cfg, "simulate", required=False)
        seed = sec.get("rng_seed", 0) if seed_override is None else seed_override
        return cube, int(seed)
    sim = _sim_config_from(cfg, seed_override)
    return simulate_stou(sim), sim.rng_seed


def _selection_inputs(cfg, cube=None, estimates=None):
    """Resolve (decay, n_samples) for the selection rules.

    An explicit embed.decay plus embed.n_samples makes selection a pure
    computation; otherwise the decay profile comes from parameters estimated
    on the cube.
    """
    emb = _section(cfg, "embed")
    if "decay" in emb:
        if "n_samples" not in emb and cube is None:
            raise InvalidConfigError(
                "embed.n_samples required when selecting without a cube")
        n_samples = int(emb["n_samples"]) if "n_samples" in emb \
            else cube.n_t - 1
        return _decay_from_cfg(emb["decay"]), n_samples, None
    if cube is None:
        raise InvalidConfigError("selection needs either embed.decay or a cube")
    if estimates is None:
        est = _section(cfg, "estimate", required=False)
        estimates = estimate_parameters(cube, tau=est.get("tau"),
                                        u=est.get("u"))
    fitted = StouModel(
        mean_reversion=estimates.mean_reversion_hat,
        cone_speed=estimates.cone_speed_hat,
    )
    decay = theta_lex_stou(fitted, seed_variance=estimates.seed_variance_hat)
    return decay, cube.n_t - 1, estimates


def _select_spacing(cfg, cube=None, estimates=None):
    emb = _section(cfg, "embed")
    decay, n_samples, estimates = _selection_inputs(cfg, cube, estimates)
    spacing = select_a_t(
        rule=emb.get("rule", "typeII"),
        decay=decay,
        dt=float(emb["dt"]) if "dt" in emb else cube.dt,
        past_frames=int(emb.get("past_frames", 1)),
        n_samples=n_samples,
        k_blocks=int(emb.get("k_blocks", 1)),
        delta=emb.get("delta"),
        grid_size=emb.get("grid_size"),
    )
    return spacing, n_samples, decay, estimates


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(cfg, config_hash, out, seed_override, threads):
    sim = _sim_config_from(cfg, seed_override)
    cube = simulate_stou(sim)
    prov = _provenance(config_hash, sim.rng_seed)
    csv_path = write_cube_csv(out / "cube.csv", cube, prov)
    _write_json(out / "cube.json", _cube_meta(cube, sim.model, prov))
    return {"cube_csv": csv_path}


def _cmd_estimate(cfg, config_hash, out, seed_override, threads):
    cube, seed = _get_cube(cfg, seed_override)
    est = _section(cfg, "estimate", required=False)
    rep = estimate_parameters(cube, tau=est.get("tau"), u=est.get("u"))
    payload = rep.to_dict()
    payload["provenance"] = _provenance(config_hash, seed)
    _write_json(out / "estimate.json", payload)
    return payload


def _cmd_select(cfg, config_hash, out, seed_override, threads):
    emb = _section(cfg, "embed")
    if "decay" in emb and "n_samples" in emb:
        cube, seed = None, _section(cfg, "simulate", required=False).get(
            "rng_seed", 0)
        if seed_override is not None:
            seed = seed_override
    else:
        cube, seed = _get_cube(cfg, seed_override)
    spacing, n_samples, decay, estimates = _select_spacing(cfg, cube)
    payload = {
        "rule": emb.get("rule", "typeII"),
        "spacing": spacing,
        "m": n_samples // spacing,
        "n_samples": n_samples,
        "decay": {"kind": decay.kind, "prefactor": decay.prefactor,
                  "rate": decay.rate},
        "provenance": _provenance(config_hash, int(seed)),
    }
    if estimates is not None:
        payload["estimates"] = estimates.to_dict()
    _write_json(out / "selection.json", payload)
    return payload


def _embedding_spec(cfg, cube, spacing, pixel=None):
    emb = _section(cfg, "embed")
    cone_speed = emb.get("cone_speed")
    if cone_speed is None:
        # floor-based cone widths are knife-edge sensitive around ratio 1,
        # so prefer the generating slope when the cube came from this run
        model_sec = _section(cfg, "model", required=False)
        cone_speed = model_sec.get("cone_speed")
    if cone_speed is None:
        raise InvalidConfigError("embed.cone_speed or model.cone_speed needed")
    return EmbeddingSpec(
        spacing=spacing,
        past_frames=int(emb.get("past_frames", 1)),
        cone_speed=float(cone_speed),
        dt=cube.dt,
        dx=cube.dx,
        pixel=int(emb.get("pixel", cube.n_x // 2)) if pixel is None else pixel,
        t0=cube.t0,
    )


def _cmd_embed(cfg, config_hash, out, seed_override, threads):
    cube, seed = _get_cube(cfg, seed_override)
    emb = _section(cfg, "embed")
    spacing = emb.get("spacing")
    if spacing is None:
        spacing, _, _, _ = _select_spacing(cfg, cube)
    spec = _embedding_spec(cfg, cube, int(spacing))
    ts = build_training_set(cube, spec)
    prov = _provenance(config_hash, seed)
    lines = _csv_header(
        ["columns: cone features in time-major order, then the target "
         f"(spacing={spec.spacing} past_frames={spec.past_frames} "
         f"pixel={spec.pixel})"],
        prov,
    )
    csv_path = out / "training.csv"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fp:
        for line in lines:
            fp.write(line + "\n")
        for i in range(ts.m):
            row = [format(v, _FLOAT_FMT) for v in ts.inputs[i]]
            row.append(format(ts.outputs[i], _FLOAT_FMT))
            fp.write(",".join(row) + "\n")
    _write_json(out / "training.json", {
        "m": ts.m, "a_pc": ts.a_pc, "spacing": spec.spacing,
        "past_frames": spec.past_frames, "pixel": spec.pixel,
        "provenance": prov,
    })
    return {"training_csv": str(csv_path), "m": ts.m, "a_pc": ts.a_pc}


def _cmd_bound(cfg, config_hash, out, seed_override, threads):
    sec = _section(cfg, "bound")
    kind = sec.get("bound_type")
    epsilon = float(sec["epsilon"])
    delta = float(sec["delta"])
    m = int(sec["m"])

    def _kl():
        return float(sec["kl"]) if "kl" in sec \
            else kl_dirac_uniform(int(sec["n_grid"]))

    def _chisq():
        return float(sec["chisq_plus_one"]) if "chisq_plus_one" in sec \
            else chisq_plus_one_dirac_uniform(int(sec["n_grid"]))

    if kind == "typeI_erm":
        rep = bound_typeI_erm(epsilon, delta, m, int(sec["n_grid"]),
                              pi_theta_term=float(sec.get("pi_theta_term", 4.0)))
    elif kind == "typeI_general":
        rep = bound_typeI_general(epsilon, delta, m, int(sec.get("k", 1)),
                                  kl=_kl(), theta_k=float(sec["theta_k"]))
    elif kind == "typeII":
        rep = bound_typeII(epsilon, delta, m, eta=float(sec["eta"]), kl=_kl(),
                           chisq_plus_one=_chisq(),
                           pi_theta1_over_delta=float(
                               sec["pi_theta1_over_delta"]))
    elif kind == "typeII_erm":
        if "theta_tilde_r" in sec:
            theta_tilde_r = float(sec["theta_tilde_r"])
        else:
            decay = _decay_from_cfg(sec["decay"])
            theta_tilde_r = decay.evaluate(float(sec["gap"]))
        rep = bound_typeII_erm(epsilon, delta, m, int(sec["n_grid"]),
                               theta_tilde_r,
                               pi_beta1=float(sec.get("pi_beta1", 1.0)),
                               decay_prefactor=float(
                                   sec.get("decay_prefactor", 1.0)))
    elif kind == "gibbs_typeI":
        rep = bound_gibbs_typeI(epsilon, delta, m,
                                inf_term=float(sec["inf_term"]),
                                theta_1=float(sec["theta_1"]))
    elif kind == "gibbs_typeII":
        rep = bound_gibbs_typeII(epsilon, delta, m, kl=_kl(),
                                 chisq_plus_one=_chisq(),
                                 pi_theta1_over_delta=float(
                                     sec["pi_theta1_over_delta"]))
    else:
        raise InvalidConfigError(f"unknown bound_type {kind!r}")
    payload = rep.to_dict()
    payload["provenance"] = _provenance(config_hash, None)
    _write_json(out / "bound.json", payload)
    return payload


def forecast_pipeline(cfg, seed_override=None, threads=1):
    """Simulate, estimate, select, embed, and forecast every interior pixel.

    The final frame is held out as the forecasting truth; all estimation and
    training happens on the frames before it. Returns per-pixel quantile
    arrays plus the summary statistics the artifacts are built from.
    """
    sim = _sim_config_from(cfg, seed_override)
    cube = simulate_stou(sim)
    train_cube = RasterCube(values=cube.values[:-1], dt=cube.dt, dx=cube.dx,
                            t0=cube.t0, x0=cube.x0)
    truth = cube.values[-1]

    emb = _section(cfg, "embed")
    spacing = emb.get("spacing")
    estimates = None
    if spacing is None:
        spacing, _, _, estimates = _select_spacing(cfg, train_cube)
    spacing = int(spacing)

    lrn = _section(cfg, "learn", required=False)
    epsilon = float(emb.get("epsilon", 1.0))
    n_draws = int(lrn.get("ensemble_size", 50))
    reference = lrn.get("reference", "gaussian_std")
    if reference != "gaussian_std":
        raise InvalidConfigError("only the gaussian_std reference is wired "
                                 "into the forecast pipeline")
    max_props = int(lrn.get("max_proposals", GIBBS_PROPOSAL_CAP))
    learn_seed = int(lrn.get("rng_seed", 1))
    stream = RandomStream.from_seed(learn_seed)

    probe = _embedding_spec(cfg, train_cube, spacing,
                            pixel=train_cube.n_x // 2)
    half = max(abs(l) for _, l in cone_offsets(probe))
    interior = range(half, train_cube.n_x - half)

    rows = []
    for pixel in interior:
        spec = _embedding_spec(cfg, train_cube, spacing, pixel=pixel)
        ts = build_training_set(train_cube, spec)
        features = forecast_features(train_cube, spec)
        fc = ensemble_forecast(ts, features, n_draws, epsilon, reference,
                               stream.child(pixel).generator(),
                               max_proposals=max_props)
        rows.append({
            "pixel": pixel,
            "min": fc.min, "q25": fc.q25, "q50": fc.q50,
            "q75": fc.q75, "max": fc.max,
            "truth": float(truth[pixel]),
        })

    iqr = np.array([r["q75"] - r["q25"] for r in rows])
    covered = np.array([r["q25"] <= r["truth"] <= r["q75"] for r in rows])
    q50 = np.array([r["q50"] for r in rows])
    truths = np.array([r["truth"] for r in rows])
    nonzero = truths != 0
    rmae = float(np.mean(np.abs(truths[nonzero] - q50[nonzero])
                         / np.abs(truths[nonzero])))
    result = {
        "rows": rows,
        "spacing": spacing,
        "m": (train_cube.n_t - 1) // spacing,
        "a_pc": len(cone_offsets(probe)),
        "epsilon": epsilon,
        "ensemble_size": n_draws,
        "coverage_iqr": float(covered.mean()),
        "mean_iqr": float(iqr.mean()),
        "aver_rmae_median": rmae,
        "interior": [interior.start, interior.stop - 1],
        "rng_seed": sim.rng_seed,
        "learn_seed": learn_seed,
    }
    if estimates is not None:
        result["estimates"] = estimates.to_dict()
    return result


def _cmd_forecast(cfg, config_hash, out, seed_override, threads):
    res = forecast_pipeline(cfg, seed_override, threads)
    prov = _provenance(config_hash, res["rng_seed"])
    lines = _csv_header(
        ["columns: pixel, min, q25, q50, q75, max, truth"], prov)
    csv_path = out / "forecast.csv"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fp:
        for line in lines:
            fp.write(line + "\n")
        for r in res["rows"]:
            fp.write(",".join([str(r["pixel"])] + [
                format(r[k], _FLOAT_FMT)
                for k in ("min", "q25", "q50", "q75", "max", "truth")
            ]) + "\n")
    pixels = [r["pixel"] for r in res["rows"]]
    table = {k: np.array([r[k] for r in res["rows"]])
             for k in ("min", "q25", "q50", "q75", "max")}
    truth = np.array([r["truth"] for r in res["rows"]])
    svg_path = report.save_forecast_plot(
        out / "forecast.svg", pixels, table, truth=truth,
        title=f"ensemble bands (spacing={res['spacing']}, m={res['m']}, "
              f"epsilon={res['epsilon']})",
        provenance=prov,
    )
    summary = {k: v for k, v in res.items() if k != "rows"}
    summary["provenance"] = prov
    _write_json(out / "forecast.json", summary)
    summary["forecast_csv"] = str(csv_path)
    summary["forecast_svg"] = str(svg_path)
    return summary


def validate_pipeline(cfg, seed_override=None, threads=1):
    """Monte-Carlo check of the concentration inequality on fresh cubes."""
    val = _section(cfg, "validate")
    emb = _section(cfg, "embed")
    sim = _sim_config_from(cfg, seed_override)
    spacing = emb.get("spacing")
    if spacing is None:
        raise InvalidConfigError("validate needs an explicit embed.spacing")
    probe_cube = RasterCube(
        values=np.zeros((sim.n_t, sim.n_x)), dt=sim.dt, dx=sim.dx,
        t0=sim.t0, x0=sim.x0)
    spec = _embedding_spec(cfg, probe_cube, int(spacing))
    epsilon = float(val.get("epsilon", 1.0))
    k = int(val.get("k", 1))
    m = (sim.n_t - 1) // spec.spacing
    s_grid = admissible_s_grid(
        m, k, epsilon,
        n_points=int(val.get("n_s", 10)),
        fraction=float(val.get("s_fraction", 0.95)),
    )
    rep = validate_exp_inequality(
        sim, spec, epsilon, s_grid,
        n_paths=int(val.get("n_paths", 100)),
        k=k,
        base_seed=int(val.get("base_seed", 1000)),
        iid_shuffle=bool(val.get("iid_shuffle", False)),
        threads=threads,
    )
    return rep, sim.rng_seed


def _cmd_validate(cfg, config_hash, out, seed_override, threads):
    rep, seed = validate_pipeline(cfg, seed_override, threads)
    prov = _provenance(config_hash, seed)
    lines = _csv_header(
        ["columns: side, s, lhs_estimate, lhs_stderr, rhs"], prov)
    csv_path = out / "validation.csv"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fp:
        for line in lines:
            fp.write(line + "\n")
        for r in rep.rows:
            fp.write(",".join([
                r["side"],
                format(r["s"], _FLOAT_FMT),
                format(r["lhs"], _FLOAT_FMT),
                format(r["lhs_stderr"], _FLOAT_FMT),
                format(r["rhs"], _FLOAT_FMT),
            ]) + "\n")
    svg_path = report.save_validation_plot(
        out / "validation.svg", rep.rows,
        title=f"concentration check (m={rep.m}, k={rep.k}, "
              f"epsilon={rep.epsilon})",
        provenance=prov,
    )
    payload = {
        "epsilon": rep.epsilon, "m": rep.m, "k": rep.k,
        "n_paths": rep.n_paths, "theta_k": rep.theta_k,
        "max_violation": rep.max_violation,
        "max_violation_sigma": rep.max_violation_sigma,
        "holds_within_3_stderr": rep.holds(3.0),
        "provenance": prov,
    }
    _write_json(out / "validation.json", payload)
    payload["validation_csv"] = str(csv_path)
    payload["validation_svg"] = str(svg_path)
    return payload


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "select": _cmd_select,
    "embed": _cmd_embed,
    "bound": _cmd_bound,
    "forecast": _cmd_forecast,
    "validate": _cmd_validate,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="conecast",
        description="Cone-embedded space-time forecasting pipeline",
    )
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the simulation rng seed")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)

    try:
        cfg, config_hash = _load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        result = _COMMANDS[args.subcommand](cfg, config_hash, out, args.seed,
                                            max(1, args.threads))
    except ConecastError as exc:
        payload = {"error": {
            "type": type(exc).__name__,
            "code": getattr(exc, "code", "error"),
            "message": str(exc),
        }}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1
    except (OSError, KeyError, ValueError) as exc:
        payload = {"error": {
            "type": type(exc).__name__,
            "code": "invalid-input",
            "message": str(exc),
        }}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1
    print(json.dumps({"ok": True, "subcommand": args.subcommand,
                      "out": str(out),
                      "summary": {k: v for k, v in result.items()
                                  if isinstance(v, (int, float, str, bool))}},
                     sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
