"""Operator entry points: run the engine, train, build datasets, benchmark.

Every command pairs human-readable output with something machine-readable
(CSV or JSON).  Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import json
import statistics
import threading
import time
from pathlib import Path

import click
import numpy as np

from . import __version__, core, mdrnn, sessionlog, toydata
from .runtime import EngineRuntime, StartupError


@click.group()
@click.version_option(version=__version__)
def main():
    """Generative MIDI co-performance engine."""


def _frontend_dir() -> Path | None:
    bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    return bundled if bundled.is_dir() else None


@main.command()
@click.option("--config", "config_path", envvar="IMPSY_CONFIG", default="config.json",
              show_default=True, type=click.Path(), help="Engine config file.")
@click.option("--virtual", is_flag=True,
              help="Use in-process loopback MIDI devices (no hardware needed).")
@click.option("--host", default="127.0.0.1", show_default=True,
              help="Web service bind address; pass 0.0.0.0 to expose on the LAN.")
@click.option("--port", default=8000, show_default=True)
@click.option("--no-service", is_flag=True, help="Run the engine without the web service.")
@click.option("--run-for", type=float, default=None,
              help="Stop after this many seconds (scripted runs and CI).")
def run(config_path, virtual, host, port, no_service, run_for):
    """Start the engine, MIDI routing, network emission, and web service."""
    t0 = time.monotonic()
    try:
        config = core.load_config(config_path)
    except core.ConfigError as exc:
        for violation in exc.violations:
            click.echo(f"config error: {violation}", err=True)
        raise SystemExit(1)
    try:
        runtime = EngineRuntime(
            config, config_path=Path(config_path),
            backend="virtual" if virtual else "rtmidi",
        )
        runtime.start()
    except (StartupError, RuntimeError) as exc:
        click.echo(f"startup failed: {exc}", err=True)
        raise SystemExit(1)
    ready_s = time.monotonic() - t0
    click.echo(f"engine ready in {ready_s:.3f} s (time to first possible output)")

    server = None
    server_thread = None
    if not no_service:
        import uvicorn

        from .service import create_app

        app = create_app(runtime, static_dir=_frontend_dir())
        server = uvicorn.Server(uvicorn.Config(app, host=host, port=port, log_level="warning"))
        server_thread = threading.Thread(target=server.run, daemon=True)
        server_thread.start()
        click.echo(f"web service on http://{host}:{port}/")

    try:
        if run_for is not None:
            time.sleep(run_for)
        else:
            while True:
                time.sleep(1.0)
    except KeyboardInterrupt:
        click.echo("stopping...")
    finally:
        if server is not None:
            server.should_exit = True
            server_thread.join(timeout=3.0)
        runtime.stop()


def _load_training_data(data_path: Path, dim: int | None) -> sessionlog.Dataset:
    if data_path.is_file():
        dataset = sessionlog.load_dataset(data_path)
        if dim is not None and dataset.D != dim:
            raise click.ClickException(
                f"dataset has dimension {dataset.D}, --dim says {dim}"
            )
        return dataset
    logs = sorted(data_path.glob("*.csv"))
    if not logs:
        raise click.ClickException(f"no session logs (*.csv) found in {data_path}")
    if dim is None:
        dim, _, _ = sessionlog.read_log(logs[0])
        if dim < 1:
            raise click.ClickException(f"cannot infer dimension from {logs[0]}")
    return sessionlog.build_dataset(logs, dim)


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, path_type=Path),
              help="Directory of session logs or a packed dataset file.")
@click.option("--dim", type=int, default=None, help="Model dimensions (inferred from logs if omitted).")
@click.option("--units", default=64, show_default=True, help="LSTM units per layer.")
@click.option("--layers", default=2, show_default=True)
@click.option("--mixtures", default=5, show_default=True)
@click.option("--seq-len", default=50, show_default=True)
@click.option("--batch-size", default=64, show_default=True)
@click.option("--learning-rate", default=1e-3, show_default=True)
@click.option("--epochs", default=30, show_default=True)
@click.option("--clip", default=1.0, show_default=True, help="Gradient-norm clip.")
@click.option("--val-split", default=0.1, show_default=True)
@click.option("--seed", type=int, default=None, help="Deterministic training.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path),
              help="Weight file to write; loss history goes beside it as JSON.")
def train(data_path, dim, units, layers, mixtures, seq_len, batch_size,
          learning_rate, epochs, clip, val_split, seed, out_path):
    """Train a model on performance logs."""
    started = time.monotonic()
    dataset = _load_training_data(data_path, dim)
    if dataset.n_frames == 0:
        raise click.ClickException("dataset is empty")
    hyper = mdrnn.TrainHyper(
        seq_len=seq_len, batch_size=batch_size, learning_rate=learning_rate,
        epochs=epochs, clip_norm=clip, val_split=val_split,
    )
    rng = np.random.default_rng(seed)

    def progress(epoch, train_loss, val_loss):
        val = f"{val_loss:.4f}" if np.isfinite(val_loss) else "-"
        click.echo(f"epoch {epoch:3d}  train nll {train_loss:.4f}  val nll {val}")

    try:
        params, history = mdrnn.train(
            dataset, hyper, rng=rng, D=dataset.D, L=layers, H=units, K=mixtures,
            progress=progress,
        )
    except mdrnn.TrainingDiverged as exc:
        raise click.ClickException(f"training aborted: {exc}")
    mdrnn.save_weights(params, out_path)
    losses_path = out_path.with_suffix(out_path.suffix + ".losses.json")
    losses_path.write_text(json.dumps(history, indent=2) + "\n", encoding="utf-8")
    elapsed = time.monotonic() - started
    click.echo(f"wrote {out_path} and {losses_path}")
    click.echo(
        f"initial nll {history['train'][0]:.4f} -> final {history['train'][-1]:.4f}"
        f" in {elapsed:.1f} s wall time"
    )


@main.command()
@click.option("--units", "units_csv", default="64,128,256,512", show_default=True,
              help="Comma-separated LSTM sizes to benchmark.")
@click.option("--dims", default=8, show_default=True)
@click.option("--iters", default=500, show_default=True, help="Timed iterations per size (>= 100).")
@click.option("--warmup", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Write the CSV here instead of stdout.")
def bench(units_csv, dims, iters, warmup, seed, out_path):
    """Time single-step prediction across model sizes."""
    if iters < 100:
        raise click.UsageError("--iters must be >= 100 for a meaningful benchmark")
    try:
        sizes = [int(u) for u in units_csv.split(",") if u.strip()]
    except ValueError:
        raise click.UsageError(f"bad --units list: {units_csv!r}")
    if not sizes:
        raise click.UsageError("no sizes given")
    rows = bench_predict(sizes, dims, iters, warmup, seed)
    click.echo(f"{'units':>6} {'mean_ms':>9} {'p50_ms':>9} {'p99_ms':>9}")
    for row in rows:
        click.echo(f"{row['units']:>6} {row['mean_ms']:>9.4f} {row['p50_ms']:>9.4f} "
                   f"{row['p99_ms']:>9.4f}")
    csv_lines = ["units,dims,iters,mean_ms,p50_ms,p99_ms"]
    for row in rows:
        csv_lines.append(
            f"{row['units']},{dims},{iters},{row['mean_ms']:.6f},"
            f"{row['p50_ms']:.6f},{row['p99_ms']:.6f}"
        )
    csv_text = "\n".join(csv_lines) + "\n"
    if out_path is not None:
        out_path.write_text(csv_text, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(csv_text, nl=False)


def bench_predict(sizes, dims: int, iters: int, warmup: int = 50, seed: int = 0):
    """Benchmark core shared by the CLI and the acceptance suite."""
    rows = []
    for units in sizes:
        rng = np.random.default_rng(seed)
        params = mdrnn.init_params(D=dims, L=2, H=units, K=5, rng=rng)
        state = mdrnn.initial_state(params)
        frame = core.initial_frame(dims)
        for _ in range(warmup):
            frame, state = mdrnn.predict_next(params, state, frame, rng=rng)
        times = []
        for _ in range(iters):
            t0 = time.perf_counter()
            frame, state = mdrnn.predict_next(params, state, frame, rng=rng)
            times.append((time.perf_counter() - t0) * 1000.0)
        times.sort()
        rows.append({
            "units": units,
            "mean_ms": statistics.fmean(times),
            "p50_ms": times[len(times) // 2],
            "p99_ms": times[min(len(times) - 1, int(len(times) * 0.99))],
        })
    return rows


@main.command("dataset")
@click.option("--logs", "logs_dir", required=True, type=click.Path(exists=True, path_type=Path),
              help="Directory of session log files.")
@click.option("--dim", required=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def dataset_cmd(logs_dir, dim, out_path):
    """Pack session logs into a training dataset file."""
    logs = sorted(logs_dir.glob("*.csv"))
    if not logs:
        raise click.ClickException(f"no session logs (*.csv) found in {logs_dir}")
    skipped_total = 0
    for path in logs:
        _, _, skipped = sessionlog.read_log(path)
        if skipped:
            click.echo(f"warning: {path.name}: skipped {skipped} corrupt line(s)", err=True)
            skipped_total += skipped
    try:
        ds = sessionlog.build_dataset(logs, dim)
    except sessionlog.DimensionMismatch as exc:
        raise click.ClickException(str(exc))
    sessionlog.save_dataset(ds, out_path)
    click.echo(
        f"wrote {out_path}: {len(ds.sequences)} sequence(s), {ds.n_frames} frames"
        + (f", {skipped_total} corrupt line(s) skipped" if skipped_total else "")
    )


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--minutes", default=5.0, show_default=True)
@click.option("--dim", default=1, show_default=True)
@click.option("--sessions", default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def synth(out_dir, minutes, dim, sessions, seed):
    """Generate a synthetic gesture corpus (sine sweeps with jitter)."""
    paths = toydata.write_corpus(out_dir, minutes=minutes, dim=dim, seed=seed,
                                 sessions=sessions)
    total = sum(sessionlog.read_log(p)[1].__len__() for p in paths)
    click.echo(f"wrote {len(paths)} session(s), {total} events, to {out_dir}")


if __name__ == "__main__":
    main()
