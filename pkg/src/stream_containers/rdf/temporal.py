"""Instants and day-time spans with exact millisecond arithmetic.

Timestamps hold the value space of xsd:dateTimeStamp as UTC epoch
milliseconds, so comparison is by instant and independent of the
timezone a lexical form used. Durations are restricted to day-time
components (D/H/M/S); year and month components have calendar-dependent
arithmetic and are rejected at parse time. Sub-millisecond digits in
lexical forms are truncated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from ..errors import DurationError, TimestampError, TimestampRangeError

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

# Yearly bounds keep every representable instant printable as a
# four-digit-year UTC lexical form.
_MIN_EPOCH_MS = int((datetime(1, 1, 1, tzinfo=timezone.utc) - _EPOCH).total_seconds() * 1000)
_MAX_EPOCH_MS = int(
    (datetime(9999, 12, 31, 23, 59, 59, 999000, tzinfo=timezone.utc) - _EPOCH).total_seconds() * 1000
)

_TIMESTAMP_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(\.\d+)?"
    r"(Z|[+-]\d{2}:\d{2})?$"
)

_DURATION_RE = re.compile(
    r"^(-)?P(?:(\d+)D)?(?:T(?:(\d+)H)?(?:(\d+)M)?(?:(\d+)(\.\d+)?S)?)?$"
)
_YEAR_MONTH_RE = re.compile(r"^-?P(?:\d+Y)?(?:\d+M)?(?:\d+D)?(?:T.*)?$")

MS_PER_SECOND = 1000
MS_PER_MINUTE = 60 * MS_PER_SECOND
MS_PER_HOUR = 60 * MS_PER_MINUTE
MS_PER_DAY = 24 * MS_PER_HOUR


@dataclass(frozen=True, slots=True, order=True)
class Duration:
    """Signed day-time span, exact at millisecond granularity."""

    ms: int

    @classmethod
    def of(cls, days: int = 0, hours: int = 0, minutes: int = 0, seconds: int = 0, ms: int = 0) -> "Duration":
        return cls(days * MS_PER_DAY + hours * MS_PER_HOUR + minutes * MS_PER_MINUTE + seconds * MS_PER_SECOND + ms)

    def __add__(self, other: "Duration") -> "Duration":
        return Duration(self.ms + other.ms)

    def __sub__(self, other: "Duration") -> "Duration":
        return Duration(self.ms - other.ms)

    def __neg__(self) -> "Duration":
        return Duration(-self.ms)

    def __mul__(self, factor: int) -> "Duration":
        return Duration(self.ms * factor)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return self.ms != 0

    def isoformat(self) -> str:
        """Canonical day-time lexical form, e.g. PT2M, P1DT2H, -PT0.5S."""
        ms = self.ms
        sign = "-" if ms < 0 else ""
        ms = abs(ms)
        days, ms = divmod(ms, MS_PER_DAY)
        hours, ms = divmod(ms, MS_PER_HOUR)
        minutes, ms = divmod(ms, MS_PER_MINUTE)
        seconds, ms = divmod(ms, MS_PER_SECOND)
        out = sign + "P"
        if days:
            out += f"{days}D"
        time_part = ""
        if hours:
            time_part += f"{hours}H"
        if minutes:
            time_part += f"{minutes}M"
        if seconds or ms or (not days and not hours and not minutes):
            sec = str(seconds)
            if ms:
                sec += f".{ms:03d}".rstrip("0")
            time_part += f"{sec}S"
        if time_part:
            out += "T" + time_part
        return out

    def __str__(self) -> str:
        return self.isoformat()


ZERO = Duration(0)


def parse_duration(lexical: str) -> Duration:
    m = _DURATION_RE.match(lexical)
    if not m:
        if _YEAR_MONTH_RE.match(lexical) and ("Y" in lexical or lexical.split("T")[0].count("M")):
            raise DurationError(
                f"year/month components are not supported (calendar-dependent arithmetic): {lexical!r}"
            )
        raise DurationError(f"malformed xsd:duration lexical form: {lexical!r}")
    sign, days, hours, minutes, seconds, fraction = m.groups()
    if days is None and hours is None and minutes is None and seconds is None:
        raise DurationError(f"duration must carry at least one component: {lexical!r}")
    ms = (
        int(days or 0) * MS_PER_DAY
        + int(hours or 0) * MS_PER_HOUR
        + int(minutes or 0) * MS_PER_MINUTE
        + int(seconds or 0) * MS_PER_SECOND
    )
    if fraction:
        # pad/truncate to milliseconds
        ms += int((fraction[1:] + "000")[:3])
    return Duration(-ms if sign else ms)


@dataclass(frozen=True, slots=True, order=True)
class Timestamp:
    """A timezone-qualified instant, stored as UTC epoch milliseconds."""

    epoch_ms: int

    def __post_init__(self):
        if not _MIN_EPOCH_MS <= self.epoch_ms <= _MAX_EPOCH_MS:
            raise TimestampRangeError(f"instant out of representable range: {self.epoch_ms} ms")

    def __add__(self, d: Duration) -> "Timestamp":
        return Timestamp(self.epoch_ms + d.ms)

    def __sub__(self, other):
        if isinstance(other, Duration):
            return Timestamp(self.epoch_ms - other.ms)
        if isinstance(other, Timestamp):
            return Duration(self.epoch_ms - other.epoch_ms)
        return NotImplemented

    def isoformat(self) -> str:
        """Canonical UTC lexical form with millisecond precision."""
        seconds, ms = divmod(self.epoch_ms, 1000)
        dt = _EPOCH + timedelta(seconds=seconds)
        return f"{dt:%Y-%m-%dT%H:%M:%S}.{ms:03d}Z"

    def __str__(self) -> str:
        return self.isoformat()


def parse_timestamp(lexical: str) -> Timestamp:
    """Parse an xsd:dateTimeStamp lexical form; the timezone is mandatory."""
    m = _TIMESTAMP_RE.match(lexical.strip())
    if not m:
        raise TimestampError(f"malformed xsd:dateTimeStamp lexical form: {lexical!r}")
    year, month, day, hour, minute, second, fraction, tz = m.groups()
    if tz is None:
        raise TimestampError(f"xsd:dateTimeStamp requires an explicit timezone: {lexical!r}")
    try:
        dt = datetime(int(year), int(month), int(day), int(hour), int(minute), int(second), tzinfo=timezone.utc)
    except ValueError as exc:
        raise TimestampError(f"invalid date or time in {lexical!r}: {exc}") from None
    ms = (fraction and int((fraction[1:] + "000")[:3])) or 0
    epoch_ms = int((dt - _EPOCH).total_seconds()) * 1000 + ms
    if tz != "Z":
        offset_min = int(tz[1:3]) * 60 + int(tz[4:6])
        if tz[0] == "+":
            epoch_ms -= offset_min * MS_PER_MINUTE
        else:
            epoch_ms += offset_min * MS_PER_MINUTE
    try:
        return Timestamp(epoch_ms)
    except TimestampRangeError:
        raise TimestampError(f"instant out of representable range: {lexical!r}") from None


def shift(t: Timestamp, d: Duration, sign: int = 1) -> Timestamp:
    """Move an instant by a span; sign +1 adds it, -1 subtracts it."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return Timestamp(t.epoch_ms + sign * d.ms)
