"""Meteorological data connector.

Two connector forms are supported: ``file:<path>`` reading a fixture, and
``http:``/``https:`` hitting an endpoint.  Either way the payload is a JSON
array of ``{"ts": ISO8601, "var": name, "val": number}`` records covering
the seven hourly variables.
"""

import json
import time
import urllib.error
import urllib.request
from pathlib import Path

import numpy as np

from .errors import ConnectorUnreachableError, ParseError, PayloadSchemaError
from .series import RawSeries, parse_timestamp
from .features import _zone

WEATHER_VARIABLES = (
    "dryBulbTemperature",
    "relativeHumidity",
    "dewPointTemperature",
    "precipitation",
    "windSpeed",
    "windDirection",
    "globalIrradiance",
)

WEATHER_UNITS = {
    "dryBulbTemperature": "°C",
    "relativeHumidity": "%RH",
    "dewPointTemperature": "°C",
    "precipitation": "relative",
    "windSpeed": "relative",
    "windDirection": "relative",
    "globalIrradiance": "relative",
}


def _fetch_payload(connector, retries, retry_wait):
    if connector.startswith("file:"):
        path = Path(connector[len("file:") :])
        if not path.exists():
            raise ConnectorUnreachableError(f"fixture {path} does not exist")
        return path.read_text(encoding="utf-8")
    if connector.startswith(("http:", "https:")):
        last = None
        for _ in range(retries + 1):
            try:
                with urllib.request.urlopen(connector, timeout=10) as resp:
                    return resp.read().decode("utf-8")
            except (urllib.error.URLError, OSError, TimeoutError) as exc:
                last = exc
                time.sleep(retry_wait)
        raise ConnectorUnreachableError(
            f"{connector} unreachable after {retries + 1} attempts: {last}"
        )
    raise ConnectorUnreachableError(f"unsupported connector {connector!r}")


def fetch_weather(connector, timezone="UTC", retries=2, retry_wait=0.2):
    """Fetch the seven weather variables as one RawSeries each.

    Raises PayloadSchemaError when a record is malformed or any variable is
    absent from the payload.
    """
    text = _fetch_payload(connector, retries, retry_wait)
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PayloadSchemaError(f"payload is not valid JSON: {exc}") from exc
    if not isinstance(records, list):
        raise PayloadSchemaError("payload must be a JSON array of records")

    tz = _zone(timezone)
    buckets = {name: ([], []) for name in WEATHER_VARIABLES}
    for i, rec in enumerate(records):
        if not isinstance(rec, dict) or not {"ts", "var", "val"} <= rec.keys():
            raise PayloadSchemaError(f"record {i} lacks ts/var/val fields")
        name = rec["var"]
        if name not in buckets:
            continue  # tolerate extra variables from richer providers
        try:
            stamp = parse_timestamp(str(rec["ts"]), tz)
            value = float(rec["val"])
        except (ValueError, TypeError) as exc:
            raise PayloadSchemaError(f"record {i} is malformed: {exc}") from exc
        buckets[name][0].append(stamp)
        buckets[name][1].append(value)

    missing = [name for name, (ts, _) in buckets.items() if not ts]
    if missing:
        raise PayloadSchemaError(f"payload lacks variables: {', '.join(missing)}")

    out = []
    for name in WEATHER_VARIABLES:
        stamps, values = buckets[name]
        stamps = np.asarray(stamps, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        order = np.argsort(stamps, kind="stable")
        stamps, values = stamps[order], values[order]
        keep = np.r_[stamps[1:] != stamps[:-1], True] if len(stamps) else []
        out.append(
            RawSeries(
                series_id=f"weather.{name}",
                unit=WEATHER_UNITS[name],
                timestamps=stamps[keep],
                values=values[keep],
                timezone=timezone,
            )
        )
    return out


def write_weather_fixture(path, series_list):
    """Serialize RawSeries back into the connector payload shape."""
    from datetime import datetime, timezone as dt_timezone

    records = []
    for series in series_list:
        name = series.series_id.split(".", 1)[-1]
        for ts, val in zip(series.timestamps, series.values):
            stamp = datetime.fromtimestamp(int(ts), dt_timezone.utc)
            records.append({"ts": stamp.isoformat(), "var": name, "val": float(val)})
    Path(path).write_text(json.dumps(records), encoding="utf-8")
