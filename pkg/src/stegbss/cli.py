"""Command-line front-end wiring the pipeline end to end.

Subcommands: gen, extract, train, eval, gridsearch, analyze.  Every
randomized step derives its stream from (global seed, step name, item
index), so re-running a command with the same configuration and inputs
produces byte-identical primary outputs.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, analysis, classify, corpus, pipeline, plots, stegosim
from .pipeline import derive_seed


class DataError(click.ClickException):
    exit_code = 2


class NumericalError(click.ClickException):
    exit_code = 3


def _parse_pair(text: str) -> tuple[int, int]:
    try:
        i, j = (int(part) for part in text.split(","))
    except ValueError:
        raise click.UsageError(f"expected a pair like '9,11', got {text!r}") from None
    return i, j


def _write_run_log(path: Path, config: dict) -> None:
    path.write_text(json.dumps(config, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _resolve(base: Path, path_text: str) -> Path:
    path = Path(path_text)
    return path if path.is_absolute() else base / path


@click.group()
@click.version_option(__version__, prog_name="stegbss")
def cli():
    """Blind-source-separation steganalysis toolkit."""


# ---------------------------------------------------------------------------
# gen

@cli.command()
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Output corpus directory.")
@click.option("--n", required=True, type=int, help="Number of covers (and of stegos).")
@click.option("--mode", type=click.Choice(["additive", "inn"]), default="additive", show_default=True)
@click.option("--alpha", type=float, default=0.2, show_default=True, help="Additive-mixer strength.")
@click.option("--height", type=int, default=128, show_default=True)
@click.option("--width", type=int, default=128, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--blocks", type=int, default=stegosim.DEFAULT_NUM_BLOCKS, show_default=True,
              help="Coupling blocks for --mode inn.")
@click.option("--weight-cap", type=float, default=stegosim.DEFAULT_WEIGHT_CAP, show_default=True,
              help="Coupling weight bound for --mode inn.")
@click.option("--target-bands", type=str, default=None,
              help="Comma-separated sub-band labels for the additive mixer.")
@click.option("--force", is_flag=True, help="Overwrite an existing corpus.")
def gen(out, n, mode, alpha, height, width, seed, blocks, weight_cap, target_bands, force):
    """Generate a reproducible cover/stego corpus with manifest and triplets.

    Stego images are embedded into their own base covers, disjoint from
    the cover-class images, so the two classes share no source image.
    """
    if n <= 0:
        raise click.UsageError("--n must be a positive integer")
    manifest_path = out / "manifest.jsonl"
    if manifest_path.exists() and not force:
        raise DataError(f"{manifest_path} already exists; pass --force to overwrite")

    if target_bands is not None:
        bands = tuple(part.strip() for part in target_bands.split(","))
    else:
        bands = stegosim.DEFAULT_TARGET_BANDS
    mix_params = stegosim.MixParams(alpha=alpha, target_bands=bands)
    net = None
    if mode == "inn":
        net = stegosim.CouplingNet.seeded(derive_seed(seed, "net", 0), blocks, weight_cap)

    for sub in ("covers", "bases", "payloads", "stegos"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    entries = []
    triplet_rows = []
    for i in range(n):
        cover = stegosim.synth_texture(height, width, derive_seed(seed, "cover", i))
        base = stegosim.synth_texture(height, width, derive_seed(seed, "cover", n + i))
        payload = stegosim.synth_texture(height, width, derive_seed(seed, "payload", i))
        if mode == "additive":
            stego = stegosim.additive_mix(base, payload, mix_params)
            scheme = f"additive(alpha={alpha})"
        else:
            stego, _ = stegosim.inn_embed(base, payload, net)
            scheme = f"inn(blocks={blocks},cap={weight_cap})"

        cover_rel = f"covers/cover_{i:04d}.png"
        base_rel = f"bases/base_{i:04d}.png"
        payload_rel = f"payloads/payload_{i:04d}.png"
        stego_rel = f"stegos/stego_{i:04d}.png"
        corpus.save_image_png(cover, out / cover_rel)
        corpus.save_image_png(base, out / base_rel)
        corpus.save_image_png(payload, out / payload_rel)
        corpus.save_image_png(stego, out / stego_rel)
        entries.append(corpus.ManifestEntry(cover_rel, "cover"))
        entries.append(corpus.ManifestEntry(stego_rel, "stego", scheme=scheme))
        triplet_rows.append((base_rel, payload_rel, stego_rel))

    corpus.write_manifest(corpus.DatasetManifest(entries), manifest_path)
    with open(out / "triplets.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cover", "payload", "stego"])
        writer.writerows(triplet_rows)
    _write_run_log(
        out / "params.json",
        {
            "command": "gen", "mode": mode, "n": n, "alpha": alpha,
            "height": height, "width": width, "seed": seed,
            "blocks": blocks if mode == "inn" else None,
            "weight_cap": weight_cap if mode == "inn" else None,
            "target_bands": list(bands), "version": __version__,
        },
    )
    click.echo(f"wrote {n} covers + {n} stegos to {out}")


# ---------------------------------------------------------------------------
# extract

@cli.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Output feature CSV.")
@click.option("--pair", type=str, default="9,11", show_default=True, help="PCA component pair (1-based).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tolerance", type=float, default=1e-4, show_default=True)
@click.option("--max-iter", type=int, default=200, show_default=True)
def extract(manifest_path, out, pair, seed, tolerance, max_iter):
    """Extract moment features for every manifest image.

    Per-image failures are logged and skipped so one corrupt file
    cannot kill a long run; any skip makes the command exit nonzero
    after writing the remaining rows.
    """
    pair_t = _parse_pair(pair)
    manifest = corpus.read_manifest(manifest_path)
    if not manifest.entries:
        raise DataError(f"{manifest_path}: empty manifest")
    root = manifest_path.parent

    records = []
    failures = []
    nonconverged = 0
    for index, entry in enumerate(manifest.entries):
        ica_params = pipeline.decomp.ICAParams(
            tolerance=tolerance, max_iterations=max_iter, seed=derive_seed(seed, "ica", index)
        )
        try:
            image = corpus.load_image(_resolve(root, entry.path))
            result = pipeline.extract_features_for_image(image, pair_t, ica_params)
        except (ValueError, OSError) as exc:
            failures.append(entry.path)
            click.echo(f"skip {entry.path}: {exc}", err=True)
            continue
        nonconverged += not result.converged
        records.append(corpus.FeatureRecord(entry.path, 1 if entry.label == "stego" else 0, result.features))

    corpus.write_features(records, out)
    _write_run_log(
        out.with_suffix(out.suffix + ".run.json"),
        {
            "command": "extract", "manifest": str(manifest_path), "pair": list(pair_t),
            "seed": seed, "tolerance": tolerance, "max_iterations": max_iter,
            "version": __version__,
        },
    )
    click.echo(
        f"extracted {len(records)}/{len(manifest.entries)} images to {out}"
        f" ({nonconverged} non-converged separations)"
    )
    if failures:
        raise DataError(f"{len(failures)} of {len(manifest.entries)} images failed; see log above")


# ---------------------------------------------------------------------------
# train / eval

@cli.command()
@click.option("--features", "features_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Output model file.")
@click.option("--c", "c_value", type=float, default=classify.DEFAULT_C, show_default=True)
@click.option("--gamma", type=float, default=classify.DEFAULT_GAMMA, show_default=True)
@click.option("--tune", is_flag=True, help="Pick C/gamma by a small grid on the training rows.")
@click.option("--seed", type=int, default=0, show_default=True)
def train(features_path, out, c_value, gamma, tune, seed):
    """Train an RBF SVM on a feature CSV and save it."""
    records = corpus.read_features(features_path)
    feats, labels = corpus.records_to_arrays(records)
    if tune:
        c_value, gamma = classify.tune_hyperparameters(feats, labels, seed=derive_seed(seed, "tune", 0))
        click.echo(f"tuned hyperparameters: C={c_value} gamma_k={gamma}")
    model = classify.train_classifier(feats, labels, c_value, gamma, seed)
    corpus.save_model(model, out)
    accuracy = np.mean((model.decision_values(feats) > 0).astype(int) == labels)
    click.echo(f"trained on {len(records)} records; training accuracy {accuracy:.4f}; model -> {out}")


@cli.command(name="eval")
@click.option("--features", "features_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--c", "c_value", type=float, default=classify.DEFAULT_C, show_default=True)
@click.option("--gamma", type=float, default=classify.DEFAULT_GAMMA, show_default=True)
@click.option("--tune", is_flag=True, help="Per-fold hyperparameter tuning on each training split.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_prefix", type=click.Path(path_type=Path), default=None,
              help="Prefix for fold CSV + figure.")
@click.option("--figure/--no-figure", default=True, show_default=True)
def eval_cmd(features_path, k, c_value, gamma, tune, seed, out_prefix, figure):
    """Stratified k-fold cross-validated accuracy of the detector."""
    records = corpus.read_features(features_path)
    feats, labels = corpus.records_to_arrays(records)
    report = classify.kfold_cv(feats, labels, k, c_value, gamma, derive_seed(seed, "cv", 0), tune=tune)
    click.echo(f"Acc (%) {report.mean_accuracy * 100:.2f}  Std (±%) {report.std_accuracy * 100:.2f}")
    if out_prefix is not None:
        folds_path = Path(f"{out_prefix}.folds.csv")
        with open(folds_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["fold", "accuracy"])
            for fold, acc in enumerate(report.fold_accuracies, start=1):
                writer.writerow([fold, f"{acc:.6f}"])
        if figure:
            plots.save_fold_accuracies(report.fold_accuracies, report.mean_accuracy, f"{out_prefix}.png")
        _write_run_log(
            Path(f"{out_prefix}.run.json"),
            {
                "command": "eval", "features": str(features_path), "k": k, "C": c_value,
                "gamma_k": gamma, "tune": tune, "seed": seed, "version": __version__,
            },
        )


# ---------------------------------------------------------------------------
# gridsearch

@cli.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Output score table CSV.")
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--c", "c_value", type=float, default=classify.DEFAULT_C, show_default=True)
@click.option("--gamma", type=float, default=classify.DEFAULT_GAMMA, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--pairs", type=str, default=None,
              help="Semicolon-separated pairs like '9,11;10,12' (default: all 66).")
@click.option("--figure/--no-figure", default=True, show_default=True)
def gridsearch(manifest_path, out, k, c_value, gamma, seed, pairs, figure):
    """Grid search over PCA component pairs, re-extracting per pair."""
    manifest = corpus.read_manifest(manifest_path)
    if not manifest.entries:
        raise DataError(f"{manifest_path}: empty manifest")
    root = manifest_path.parent
    images = [corpus.load_image(_resolve(root, entry.path)) for entry in manifest.entries]
    labels = np.array([1 if entry.label == "stego" else 0 for entry in manifest.entries])

    candidate_pairs = None
    if pairs is not None:
        candidate_pairs = [_parse_pair(part) for part in pairs.split(";") if part.strip()]
    result = classify.grid_search_pca_pair(images, labels, candidate_pairs, k, c_value, gamma, seed)

    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["i", "j", "mean_acc", "std_acc"])
        for row in result.table:
            writer.writerow([row.i, row.j, f"{row.mean_acc:.6f}", f"{row.std_acc:.6f}"])
    if figure:
        plots.save_pair_score_heatmap(result.table, result.best_pair, out.with_suffix(".png"))
    _write_run_log(
        out.with_suffix(out.suffix + ".run.json"),
        {
            "command": "gridsearch", "manifest": str(manifest_path), "k": k, "C": c_value,
            "gamma_k": gamma, "seed": seed,
            "pairs": [list(p) for p in candidate_pairs] if candidate_pairs else "all",
            "version": __version__,
        },
    )
    best = max(result.table, key=lambda r: r.mean_acc)
    click.echo(f"best pair ({result.best_pair[0]},{result.best_pair[1]}) mean_acc {best.mean_acc:.4f}")


# ---------------------------------------------------------------------------
# analyze

@cli.command()
@click.option("--triplets", "triplets_path", required=True, type=click.Path(exists=True, path_type=Path),
              help="CSV with header cover,payload,stego (as written by gen).")
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Output matrix CSV.")
@click.option("--pgm", type=click.Path(path_type=Path), default=None,
              help="Also dump the matrix as a PGM heatmap.")
@click.option("--dump-bands", type=click.Path(path_type=Path), default=None,
              help="Dump the first triplet's difference sub-bands as PGM files.")
@click.option("--figure/--no-figure", default=True, show_default=True)
def analyze(triplets_path, out, pgm, dump_bands, figure):
    """Correlate payload sub-bands with embedding changes over triplets."""
    root = triplets_path.parent
    triplets = []
    with open(triplets_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["cover", "payload", "stego"]:
            raise DataError(f"{triplets_path}: expected header cover,payload,stego, got {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"{triplets_path}: malformed triplet row {row}")
            triplets.append(tuple(corpus.load_image(_resolve(root, p)) for p in row))
    if not triplets:
        raise DataError(f"{triplets_path}: no triplets listed")

    matrix = analysis.correlation_matrix(triplets)
    _write_correlation_csv(matrix, out)
    if matrix.degenerate.any():
        flags_path = out.with_suffix(out.suffix + ".degenerate.csv")
        _write_flags_csv(matrix, flags_path)
        click.echo(f"degenerate (zero-variance) entries flagged in {flags_path}", err=True)
    if figure:
        plots.save_correlation_heatmap(matrix.values, out.with_suffix(".png"),
                                       title=f"{len(triplets)} triplets")
    if pgm is not None:
        corpus.write_pgm(matrix.values, pgm)
    if dump_bands is not None:
        dump_bands.mkdir(parents=True, exist_ok=True)
        cover, payload, stego = triplets[0]
        changes = analysis.embedding_changes(cover, stego)
        for slot, label in enumerate(matrix.col_labels):
            corpus.write_pgm(changes.bands[slot], dump_bands / f"change_{label}.pgm")
    click.echo(f"correlation matrix over {len(triplets)} triplets -> {out}")


def _write_correlation_csv(matrix: analysis.CorrelationMatrix, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["payload_band"] + list(matrix.col_labels))
        for r, label in enumerate(matrix.row_labels):
            writer.writerow([label] + [f"{v:.17g}" for v in matrix.values[r]])


def _write_flags_csv(matrix: analysis.CorrelationMatrix, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["payload_band"] + list(matrix.col_labels))
        for r, label in enumerate(matrix.row_labels):
            writer.writerow([label] + [int(v) for v in matrix.degenerate[r]])


# ---------------------------------------------------------------------------
# entry points

def main(argv: list[str] | None = None) -> int:
    """Run the CLI; returns the process exit code instead of raising."""
    try:
        cli.main(args=argv, prog_name="stegbss", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except (ValueError, KeyError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 3
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
