"""Synthetic gesture corpus: sinusoid sweeps with timing jitter.

Good enough to exercise the whole train-and-play path without hardware:
values follow slow sine gestures whose frequency, register and span
change between phrases, event spacing is jittered around a playable rate,
and occasional rests separate phrases.  Written out as ordinary session
logs so the dataset builder sees exactly what a performance would leave
behind.
"""

from __future__ import annotations

from datetime import datetime, timedelta
from pathlib import Path
from typing import Optional

import numpy as np

from .sessionlog import LOG_HEADER_PREFIX, LogRecord, format_record


def gesture_sequence(duration_s: float, dim: int, rng: np.random.Generator):
    """Yield (t_seconds, values) tuples for one improvised-feeling session."""
    t = 0.0
    freq = rng.uniform(0.1, 0.5, size=dim)
    phase = rng.uniform(0, 2 * np.pi, size=dim)
    center = rng.uniform(0.35, 0.65, size=dim)
    span = rng.uniform(0.2, 0.4, size=dim)
    phrase_left = rng.uniform(8.0, 20.0)
    while t < duration_s:
        dt = float(np.clip(rng.normal(0.12, 0.03), 0.03, 0.5))
        phrase_left -= dt
        if phrase_left <= 0:
            # new phrase: new contour, short rest
            freq = rng.uniform(0.1, 0.5, size=dim)
            phase = rng.uniform(0, 2 * np.pi, size=dim)
            center = rng.uniform(0.35, 0.65, size=dim)
            span = rng.uniform(0.2, 0.4, size=dim)
            phrase_left = rng.uniform(8.0, 20.0)
            dt += float(rng.uniform(0.5, 2.0))
        t += dt
        values = center + 0.5 * span * np.sin(2 * np.pi * freq * t + phase)
        values = values + rng.normal(0.0, 0.01, size=dim)
        yield t, np.clip(values, 0.0, 1.0)


def write_corpus(
    out_dir,
    minutes: float = 5.0,
    dim: int = 1,
    seed: Optional[int] = None,
    sessions: int = 3,
    start: Optional[datetime] = None,
) -> list[Path]:
    """Write ``sessions`` log files totalling ``minutes`` of events."""
    rng = np.random.default_rng(seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = start if start is not None else datetime(2026, 1, 1, 12, 0, 0)
    per_session = minutes * 60.0 / sessions
    paths = []
    for s in range(sessions):
        session_start = start + timedelta(hours=s)
        path = out_dir / (session_start.strftime("%Y%m%dT%H%M%S") + ".csv")
        lines = [f"{LOG_HEADER_PREFIX}{dim}"]
        for t, values in gesture_sequence(per_session, dim, rng):
            record = LogRecord(
                at=session_start + timedelta(seconds=t),
                source="human",
                dims=tuple(float(v) for v in values),
            )
            lines.append(format_record(record))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(path)
    return paths
