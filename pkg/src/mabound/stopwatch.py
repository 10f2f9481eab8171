from __future__ import annotations

__all__ = ("Stopwatch",)

import typing as t
from timeit import default_timer as timer

import attr
from loguru import logger

if t.TYPE_CHECKING:
    from types import TracebackType


@attr.s(slots=True, repr=False, str=False, eq=False, hash=False)
class Stopwatch:
    """Times a solve or a CLI command, one labelled lap per stage.

    The solver closes a lap after each grid level, and the CLI wraps the
    whole command in a stopwatch.

    Attributes
    ----------
    paused: bool
        True unless the stopwatch is currently running.
    duration: float
        The total running time, in seconds.
    laps: tuple[tuple[str, float], ...]
        The label and running time, in seconds, of each closed lap.
    """
    _banked: float = attr.ib(default=0.0)
    _running_since: float | None = attr.ib(default=None)
    _lap_mark: float = attr.ib(default=0.0)
    _laps: list[tuple[str, float]] = attr.ib(factory=list)

    def __enter__(self) -> t.Self:
        self.start()
        return self

    def __exit__(
        self,
        ex_type: type[BaseException] | None,
        ex_val: BaseException | None,
        ex_tb: TracebackType | None,
    ) -> None:
        self.stop()

    def __repr__(self) -> str:
        return f"Stopwatch(paused={self.paused}, duration={self.duration}, laps={self.laps!r})"

    def __str__(self) -> str:
        state = "PAUSED" if self.paused else "RUNNING"
        text = f"[{state}] {self.duration:.3f} s"
        if self._laps:
            text += " (" + ", ".join(f"{label}: {seconds:.3f} s" for label, seconds in self._laps) + ")"
        return text

    def start(self) -> None:
        if self._running_since is not None:
            logger.warning("stopwatch started twice; ignoring")
            return
        self._running_since = timer()

    def stop(self) -> None:
        if self._running_since is not None:
            self._banked += timer() - self._running_since
            self._running_since = None

    def lap(self, label: str | None = None) -> float:
        """Closes the current lap and returns its running time in seconds.

        Unlabelled laps are numbered from one.
        """
        now = self.duration
        seconds = now - self._lap_mark
        self._lap_mark = now
        self._laps.append((label or str(len(self._laps) + 1), seconds))
        return seconds

    @property
    def paused(self) -> bool:
        return self._running_since is None

    @property
    def laps(self) -> tuple[tuple[str, float], ...]:
        return tuple(self._laps)

    @property
    def duration(self) -> float:
        if self._running_since is None:
            return self._banked
        return self._banked + timer() - self._running_since
