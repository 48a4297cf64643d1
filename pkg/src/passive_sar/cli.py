"""Command-line surface tying the pipeline together.

Subcommands: make-model, gen-data, reconstruct, backproject, train,
gradcheck, evaluate.  Exit codes: 0 success, 1 usage error, 2 configuration
or file-format error, 3 numerical failure.  Every run writes a manifest
(config echo, seeds, artifact hashes) from which it can be re-executed
reproducibly.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import CmpxError, ConfigError, NumericalError
from .fileio import atomic_write_bytes, export_image_pgm, load_matrix, save_matrix, sha256_file
from .gradients import gradient_check_case
from .metrics import contrast, cross_section, data_mismatch, image_error, waveform_error
from .network import forward_encode, make_network_params
from .scenes import (
    PHANTOM_STRONG,
    PHANTOM_WEAK,
    SceneImage,
    gen_point_phantom,
    gen_random_scene,
    make_dataset,
)
from .sensing import apply_adjoint, build_gram, build_sensing_matrix, max_eigenvalue_estimate
from .training import train as run_training
from .waveform import generate_qpsk, init_all_ones

GRADCHECK_TOLERANCE = 1e-6


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="passive-sar", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="path to the JSON run config")
        p.add_argument("--out", help="output directory (defaults to the config output_dir)")

    p = sub.add_parser("make-model", help="build and save the sensing and weight matrices")
    common(p)

    p = sub.add_parser("gen-data", help="simulate scenes and noisy measurements")
    common(p)
    p.add_argument("--snr-db", type=float, help="override: single SNR instead of the config list")
    p.add_argument("--seed", type=int, help="override the simulation seed")

    p = sub.add_parser("reconstruct", help="forward-encode measurements into images")
    common(p)
    p.add_argument("--waveform", required=True, help="CMPX file with the waveform to use")
    p.add_argument("--data", required=True, help="CMPX file with measurements (rows = samples)")
    p.add_argument("--tau", type=float, help="threshold (default: step_size * regularization)")
    p.add_argument("--layers", type=int, help="override the layer count")

    p = sub.add_parser("backproject", help="matched-filter backprojection images")
    common(p)
    p.add_argument("--waveform", required=True)
    p.add_argument("--data", required=True)

    p = sub.add_parser("train", help="projected SGD over waveform and threshold")
    common(p)
    p.add_argument("--epochs", type=int, help="override the epoch count")
    p.add_argument("--layers", type=int, help="override the layer count")
    p.add_argument("--seed", type=int, help="override the training seed")
    p.add_argument("--snr-db", type=float, help="override: train at this SNR")

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference gradient report")
    common(p, config_required=False)
    p.add_argument("--seeds", type=int, default=20, help="number of random trials")
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--step", type=float, default=1e-6)

    p = sub.add_parser("evaluate", help="metrics and cross-sections on a test set")
    common(p)
    p.add_argument("--waveform", required=True, help="CMPX file with the (learned) waveform")
    p.add_argument("--tau", type=float)
    p.add_argument("--snr-db", type=float, help="override: single test SNR")
    p.add_argument(
        "--average-images",
        action="store_true",
        help="average the reconstructions before computing image metrics",
    )
    return parser


def cli_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version print and exit
        return int(exc.code or 0)
    handler = {
        "make-model": _cmd_make_model,
        "gen-data": _cmd_gen_data,
        "reconstruct": _cmd_reconstruct,
        "backproject": _cmd_backproject,
        "train": _cmd_train,
        "gradcheck": _cmd_gradcheck,
        "evaluate": _cmd_evaluate,
    }[args.command]
    try:
        return handler(args)
    except (ConfigError, CmpxError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3


def main():
    sys.exit(cli_dispatch(sys.argv[1:]))


# --------------------------------------------------------------------------
# shared helpers

def _out_dir(args, cfg: RunConfig | None, default_name: str) -> Path:
    if args.out:
        out = Path(args.out)
    elif cfg is not None and cfg.output_dir:
        out = Path(cfg.output_dir) / default_name
    else:
        raise ConfigError("no output directory: pass --out or set output_dir in the config")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build_model(cfg: RunConfig):
    grid = cfg.make_grid()
    sensing = build_sensing_matrix(grid, max_entries=cfg.network.max_matrix_entries)
    lam_max = max_eigenvalue_estimate(sensing, tolerance=1e-3)
    alpha = cfg.network.step_size
    if alpha is None:
        alpha = 0.99 / lam_max
    elif alpha > (1.0 / lam_max) * (1.0 + 1e-3):
        raise ConfigError(
            f"step_size {alpha} exceeds the stability bound 1/lambda_max = {1.0 / lam_max:.6e}"
        )
    return grid, sensing, float(alpha), float(lam_max)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    atomic_write_bytes(path, buf.getvalue().encode("ascii"))


def _write_manifest(out: Path, command: str, cfg: RunConfig | None, overrides: dict,
                    artifacts, extra: dict | None = None) -> None:
    manifest = {
        "command": command,
        "config": None if cfg is None else cfg.raw,
        "overrides": {k: v for k, v in overrides.items() if v is not None},
        "artifacts": {name: sha256_file(out / name) for name in sorted(artifacts)},
    }
    if extra:
        manifest["extra"] = extra
    blob = json.dumps(manifest, indent=2, sort_keys=True).encode("ascii")
    atomic_write_bytes(out / "manifest.json", blob)


def _load_samples(path, expected_len: int) -> np.ndarray:
    mat = load_matrix(path)
    if mat.shape[1] == expected_len:
        return mat
    if mat.shape == (expected_len, 1):
        return mat.T
    raise ConfigError(
        f"measurement file {path} has shape {mat.shape}, incompatible with M = {expected_len}"
    )


def _snr_tag(snr) -> str:
    if snr is None:
        return "noiseless"
    return f"snr_{snr:+g}dB".replace(".", "p")


# --------------------------------------------------------------------------
# commands

def _cmd_make_model(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg, "model")
    grid, sensing, alpha, lam_max = _build_model(cfg)
    save_matrix(out / "sensing.cmpx", sensing.entries)
    gram = build_gram(sensing, init_all_ones(grid.measurement_count), alpha)
    save_matrix(out / "gram.cmpx", gram.entries)
    _write_manifest(
        out, "make-model", cfg, {},
        ["sensing.cmpx", "gram.cmpx"],
        extra={
            "lambda_max": lam_max,
            "step_size": alpha,
            "grid_fingerprint": sensing.grid_fingerprint,
            "shape": [grid.measurement_count, grid.pixel_count],
        },
    )
    print(f"model written to {out} (M={grid.measurement_count}, N={grid.pixel_count})")
    return 0


def _cmd_gen_data(args) -> int:
    cfg = load_config(args.config)
    sim = cfg.require_simulation()
    out = _out_dir(args, cfg, "data")
    grid = cfg.make_grid()
    sensing = build_sensing_matrix(grid, max_entries=cfg.network.max_matrix_entries)
    seed = sim.seed if args.seed is None else args.seed
    w_true = generate_qpsk(grid.frequency_count, grid.slow_time_count, sim.waveform_seed)

    snr_list = [args.snr_db] if args.snr_db is not None else sim.snr_db
    artifacts = []
    seeds_used = {"waveform_seed": sim.waveform_seed, "base_seed": seed, "per_snr": {}}
    for idx, snr in enumerate(snr_list):
        tag = _snr_tag(snr)
        dataset = make_dataset(
            grid, w_true, sim.sample_count, snr, seed + idx, sensing=sensing, mode="train"
        )
        sub = out / tag
        sub.mkdir(parents=True, exist_ok=True)
        save_matrix(sub / "measurements.cmpx", dataset.samples)
        scene_mat = np.stack([s.values for s in dataset.scenes]).astype(np.complex128)
        save_matrix(sub / "scenes.cmpx", scene_mat)
        artifacts += [f"{tag}/measurements.cmpx", f"{tag}/scenes.cmpx"]
        seeds_used["per_snr"][tag] = seed + idx
    save_matrix(out / "true_waveform.cmpx", w_true.values)
    artifacts.append("true_waveform.cmpx")
    _write_manifest(
        out, "gen-data", cfg,
        {"snr_db": args.snr_db, "seed": args.seed},
        artifacts, extra={"seeds": seeds_used},
    )
    print(f"{len(snr_list)} dataset(s) of {sim.sample_count} samples written to {out}")
    return 0


def _reconstruction_params(cfg: RunConfig, args, waveform_values: np.ndarray):
    grid, sensing, alpha, lam_max = _build_model(cfg)
    if len(waveform_values) != grid.measurement_count:
        raise ConfigError(
            f"waveform length {len(waveform_values)} does not match M = {grid.measurement_count}"
        )
    layers = args.layers if getattr(args, "layers", None) else cfg.network.layers
    tau = args.tau if getattr(args, "tau", None) is not None else alpha * cfg.network.regularization
    params = make_network_params(
        sensing, waveform_values, alpha, cfg.network.regularization, layers, threshold=tau
    )
    return grid, params


def _cmd_reconstruct(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg, "reconstruct")
    w = load_matrix(args.waveform).reshape(-1)
    grid, params = _reconstruction_params(cfg, args, w)
    samples = _load_samples(args.data, grid.measurement_count)

    artifacts = []
    rows = []
    for t, d in enumerate(samples):
        image = forward_encode(params, d).final_normalized
        name = f"image_{t:03d}.pgm"
        export_image_pgm(SceneImage(image, grid.pixels_per_side), out / name)
        artifacts.append(name)
        rows.append(list(image))
    _write_csv(out / "images.csv", [f"pixel_{n}" for n in range(grid.pixel_count)], rows)
    artifacts.append("images.csv")
    _write_manifest(
        out, "reconstruct", cfg,
        {"tau": args.tau, "layers": args.layers,
         "waveform": str(args.waveform), "data": str(args.data)},
        artifacts, extra={"threshold": params.threshold, "step_size": params.step_size},
    )
    print(f"{len(samples)} reconstruction(s) written to {out}")
    return 0


def _cmd_backproject(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg, "backproject")
    grid = cfg.make_grid()
    sensing = build_sensing_matrix(grid, max_entries=cfg.network.max_matrix_entries)
    w = load_matrix(args.waveform).reshape(-1)
    if len(w) != grid.measurement_count:
        raise ConfigError(f"waveform length {len(w)} does not match M = {grid.measurement_count}")
    samples = _load_samples(args.data, grid.measurement_count)

    artifacts = []
    rows = []
    for t, d in enumerate(samples):
        image = np.abs(apply_adjoint(sensing, w, d))
        peak = image.max()
        name = f"backprojection_{t:03d}.pgm"
        display = image / peak if peak > 0 else image
        export_image_pgm(SceneImage(display, grid.pixels_per_side), out / name)
        artifacts.append(name)
        rows.append(list(image))
    _write_csv(out / "backprojections.csv", [f"pixel_{n}" for n in range(grid.pixel_count)], rows)
    artifacts.append("backprojections.csv")
    _write_manifest(
        out, "backproject", cfg,
        {"waveform": str(args.waveform), "data": str(args.data)}, artifacts,
    )
    print(f"{len(samples)} backprojection(s) written to {out}")
    return 0


def _cmd_train(args) -> int:
    cfg = load_config(args.config)
    train_cfg = cfg.require_train()
    sim = cfg.require_simulation()
    out = _out_dir(args, cfg, "train")
    if args.epochs:
        train_cfg.epochs = args.epochs
    if args.seed is not None:
        train_cfg.seed = args.seed
    layers = args.layers if args.layers else cfg.network.layers

    grid, sensing, alpha, lam_max = _build_model(cfg)
    w_true = generate_qpsk(grid.frequency_count, grid.slow_time_count, sim.waveform_seed)
    snr = args.snr_db if args.snr_db is not None else sim.snr_db[0]
    dataset = make_dataset(
        grid, w_true, sim.sample_count, snr, sim.seed, sensing=sensing, mode="train"
    )
    params = make_network_params(
        sensing, init_all_ones(grid.measurement_count), alpha, cfg.network.regularization, layers
    )
    record = run_training(params, dataset.samples, train_cfg, truth=w_true)

    artifacts = ["history.csv", "learned_waveform.cmpx"]
    rows = [
        [epoch + 1, record.loss[epoch], record.waveform_error[epoch], record.threshold[epoch]]
        for epoch in range(record.epoch_count)
    ]
    _write_csv(out / "history.csv", ["epoch", "loss_mean", "waveform_error", "tau"], rows)
    save_matrix(out / "learned_waveform.cmpx", record.params.waveform.values)
    for epoch, values in record.snapshots.items():
        name = f"waveform_epoch_{epoch:03d}.cmpx"
        save_matrix(out / name, values)
        artifacts.append(name)
    _write_manifest(
        out, "train", cfg,
        {"epochs": args.epochs, "layers": args.layers, "seed": args.seed, "snr_db": args.snr_db},
        artifacts,
        extra={
            "lambda_max": lam_max,
            "step_size": alpha,
            "final_threshold": record.params.threshold,
            "initial_loss": record.initial_loss,
            "initial_waveform_error": record.initial_waveform_error,
            "wall_time_s": list(record.wall_time),
        },
    )
    print(
        f"trained {record.epoch_count} epoch(s): waveform error "
        f"{record.initial_waveform_error:.4f} -> {record.waveform_error[-1]:.4f}"
    )
    return 0


def _gradcheck_sensing(args):
    if args.config:
        cfg = load_config(args.config)
        grid = cfg.make_grid()
        return build_sensing_matrix(grid, max_entries=cfg.network.max_matrix_entries), cfg
    # built-in tiny instance: 3x3 scene, 3 slow times x 4 frequencies
    from .geometry import ImagingGeometry, make_grid

    geometry = ImagingGeometry(
        transmitter_position=[11200.0, 11200.0, 200.0],
        receiver_radius=7000.0,
        receiver_height=6500.0,
    )
    grid = make_grid(geometry, pixels_per_side=3, slow_time_count=3,
                     frequency_count=4, scene_extent=60.0)
    return build_sensing_matrix(grid), None


def _cmd_gradcheck(args) -> int:
    sensing, cfg = _gradcheck_sensing(args)
    rows = []
    worst = 0.0
    for seed in range(args.seeds):
        rel_w, err_tau = gradient_check_case(
            sensing, layer_count=args.layers, seed=seed, step=args.step
        )
        worst = max(worst, rel_w, err_tau)
        rows.append([seed, rel_w, err_tau])
    header = ["seed", "waveform_rel_err", "threshold_err"]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "gradcheck.csv", header, rows)
        _write_manifest(out, "gradcheck", cfg,
                        {"seeds": args.seeds, "layers": args.layers, "step": args.step},
                        ["gradcheck.csv"], extra={"worst_error": worst})
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[0], repr(row[1]), repr(row[2])])
    if worst > GRADCHECK_TOLERANCE:
        print(f"numerical failure: worst error {worst:.3e} exceeds {GRADCHECK_TOLERANCE}",
              file=sys.stderr)
        return 3
    return 0


def _cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    sim = cfg.require_simulation()
    out = _out_dir(args, cfg, "evaluate")
    w_learned = load_matrix(args.waveform).reshape(-1)
    grid, params = _reconstruction_params(cfg, args, w_learned)
    w_true = generate_qpsk(grid.frequency_count, grid.slow_time_count, sim.waveform_seed)

    side = grid.pixels_per_side
    if side == 31:
        scene = gen_point_phantom(side)
    else:
        scene = gen_random_scene(side, sim.seed)
    snr = args.snr_db if args.snr_db is not None else sim.snr_db[0]
    dataset = make_dataset(grid, w_true, sim.test_realizations, snr, sim.seed,
                           sensing=params.sensing, mode="test", scene=scene)

    support = scene.support_mask()
    recons = np.stack([forward_encode(params, d).final_normalized for d in dataset.samples])
    l_w = waveform_error(w_true, w_learned)

    rows = []
    for t, d in enumerate(dataset.samples):
        rows.append([
            t,
            data_mismatch(params, recons[t], d),
            image_error(recons[t], scene.values),
            contrast(recons[t], support),
            l_w,
        ])
    mean_image = recons.mean(axis=0)
    if args.average_images:
        summary = [
            "mean",
            float(np.mean([r[1] for r in rows])),
            image_error(mean_image, scene.values),
            contrast(mean_image, support),
            l_w,
        ]
    else:
        summary = [
            "mean",
            float(np.mean([r[1] for r in rows])),
            float(np.mean([r[2] for r in rows])),
            float(np.mean([r[3] for r in rows])),
            l_w,
        ]
    _write_csv(out / "metrics.csv",
               ["sample", "data_mismatch", "image_error", "contrast", "waveform_error"],
               rows + [summary])
    export_image_pgm(SceneImage(np.minimum(mean_image, 1.0), side), out / "mean_image.pgm")
    artifacts = ["metrics.csv", "mean_image.pgm"]

    if side == 31:
        cuts = [("row", r) for r in sorted({p[0] for p in PHANTOM_STRONG} | {PHANTOM_WEAK[0]})]
        cuts += [("column", c) for c in sorted({p[1] for p in PHANTOM_STRONG} | {PHANTOM_WEAK[1]})]
        cut_rows = []
        mean_scene = SceneImage(mean_image, side)
        for axis, index in cuts:
            cs = cross_section(mean_scene, axis, index, target_mask=support, log10=True)
            cut_rows.append([axis, index, cs.peak, cs.background_mean] + list(cs.values))
        _write_csv(out / "cross_sections.csv",
                   ["axis", "index", "peak", "background_mean"]
                   + [f"bin_{i}" for i in range(side)],
                   cut_rows)
        artifacts.append("cross_sections.csv")

    _write_manifest(
        out, "evaluate", cfg,
        {"waveform": str(args.waveform), "tau": args.tau, "snr_db": args.snr_db,
         "average_images": args.average_images or None},
        artifacts, extra={"waveform_error": l_w, "threshold": params.threshold},
    )
    print(f"evaluation over {dataset.sample_count} realizations written to {out}")
    return 0
