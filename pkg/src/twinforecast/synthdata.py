"""Deterministic synthetic building-climate generator.

Reproduces the qualitative phenomena the pipeline must handle: daily and
annual seasonality outdoors, first-order thermal buffering indoors (strong
in the basement, weak on the top floor), thermostat regulation in the
heated room, basement humidity saturation, and occupancy events that pulse
CO2 and bump temperature/humidity.  Everything is a pure function of the
scenario, so identical seeds give bit-identical series.
"""

import math
from dataclasses import dataclass, field
from datetime import datetime
from zoneinfo import ZoneInfo

import numpy as np

from .errors import InvalidScenarioError
from .series import HOUR, RegularSeries

# Magnus saturation vapor pressure constants (hPa over water)
_MAGNUS_A = 6.112
_MAGNUS_B = 17.62
_MAGNUS_C = 243.12

HOURS_PER_YEAR = 8760.0


def saturation_vapor_pressure(temp_c):
    temp_c = np.asarray(temp_c, dtype=np.float64)
    return _MAGNUS_A * np.exp(_MAGNUS_B * temp_c / (_MAGNUS_C + temp_c))


def dew_point(vapor_pressure_hpa):
    ln = np.log(np.maximum(vapor_pressure_hpa, 1e-6) / _MAGNUS_A)
    return _MAGNUS_C * ln / (_MAGNUS_B - ln)


@dataclass
class RoomConfig:
    name: str
    floor: str
    tau_hours: float
    heated: bool = False
    setpoint: float = 17.0
    heat_gain: float = 0.8
    ground_tau_hours: float = None  # soil coupling; basement rooms set this
    solar_gain: float = 0.8
    moisture_source: float = 0.0  # hPa of vapor pressure per hour
    moisture_tau_hours: float = 48.0
    co2_baseline: float = 480.0


@dataclass
class OccupancyEvent:
    room: str
    start_hour: int
    duration_hours: int
    co2_amplitude: float = 1500.0
    temp_bump: float = 1.0
    rh_bump: float = 5.0
    decay_hours: float = 3.0


@dataclass
class OutdoorModel:
    mean_temp: float = 7.0
    annual_amplitude: float = 9.0
    daily_amplitude: float = 3.5
    noise_std: float = 1.2
    noise_phi: float = 0.85
    rh_base: float = 80.0
    rh_annual_amplitude: float = 8.0
    rh_daily_amplitude: float = 8.0
    rh_noise_std: float = 4.0
    ground_temp: float = 9.0
    wind_mean: float = 3.5
    clear_sky_wm2: float = 800.0
    wet_hour_probability: float = 0.08


@dataclass
class ClimateScenario:
    seed: int = 7
    length_hours: int = 8760
    start: str = "2023-01-01T00:00"
    timezone: str = "Europe/Stockholm"
    outdoor: OutdoorModel = field(default_factory=OutdoorModel)
    rooms: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def validate(self):
        if self.length_hours < 1:
            raise InvalidScenarioError("scenario length must be >= 1 hour")
        names = set()
        for room in self.rooms:
            if room.tau_hours <= 0:
                raise InvalidScenarioError(f"room {room.name}: tau must be > 0")
            if room.name in names:
                raise InvalidScenarioError(f"duplicate room name {room.name!r}")
            names.add(room.name)
            if room.heated and not -40.0 <= room.setpoint <= 60.0:
                raise InvalidScenarioError(
                    f"room {room.name}: setpoint {room.setpoint} outside bounds"
                )
        for event in self.events:
            if event.duration_hours < 1:
                raise InvalidScenarioError("event duration must be >= 1 hour")
            if event.room not in names:
                raise InvalidScenarioError(f"event targets unknown room {event.room!r}")
            if not all(
                math.isfinite(x)
                for x in (event.co2_amplitude, event.temp_bump, event.rh_bump)
            ):
                raise InvalidScenarioError("event amplitudes must be finite")
            if event.start_hour < 0 or event.start_hour >= self.length_hours:
                raise InvalidScenarioError("event start outside the scenario span")
        return self

    def start_epoch(self):
        dt = datetime.fromisoformat(self.start).replace(
            tzinfo=ZoneInfo(self.timezone)
        )
        return int(dt.timestamp())


def _rng(seed, stream):
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


def _ar1(rng, n, phi, std):
    noise = rng.standard_normal(n) * std * math.sqrt(max(1.0 - phi * phi, 1e-12))
    out = np.empty(n)
    state = rng.standard_normal() * std
    for i in range(n):
        state = phi * state + noise[i]
        out[i] = state
    return out


def _day_pulse(hours_local):
    """0 at night, peaking early afternoon; exactly 24 h periodic."""
    return np.maximum(0.0, np.sin(2.0 * math.pi * (hours_local - 9.0) / 24.0))


def _event_pulse(n, event):
    """Plateau at full amplitude during the event, exponential tail after."""
    shape = np.zeros(n)
    end = min(event.start_hour + event.duration_hours, n)
    shape[event.start_hour : end] = 1.0
    tail = np.arange(end, n) - end
    shape[end:] = np.exp(-(tail + 1.0) / max(event.decay_hours, 1e-6))
    shape[shape < 1e-4] = 0.0
    return shape


def _local_hours(scenario, n):
    tz = ZoneInfo(scenario.timezone)
    start = scenario.start_epoch()
    return np.array(
        [
            datetime.fromtimestamp(start + i * HOUR, tz).hour
            + datetime.fromtimestamp(start + i * HOUR, tz).minute / 60.0
            for i in range(n)
        ]
    )


@dataclass
class GeneratedClimate:
    scenario: ClimateScenario
    series: dict
    annotations: list

    def weather(self):
        """Weather series keyed by canonical variable name."""
        prefix = "weather."
        return {
            key[len(prefix) :]: value
            for key, value in self.series.items()
            if key.startswith(prefix)
        }

    def room_series(self, room, variable):
        return self.series[f"{room}.{variable}"]


def generate(scenario):
    """Produce outdoor weather (7 variables) plus per-room T/RH/CO2."""
    scenario.validate()
    n = scenario.length_hours
    out = scenario.outdoor
    start = scenario.start_epoch()
    tz = scenario.timezone

    h = np.arange(n, dtype=np.float64)
    local_hours = _local_hours(scenario, n)
    annual = -np.cos(2.0 * math.pi * (h / 24.0 - 15.0) / 365.0)
    daily = np.sin(2.0 * math.pi * (local_hours - 9.0) / 24.0)

    temp_noise = _ar1(_rng(scenario.seed, 1), n, out.noise_phi, out.noise_std)
    t_out = (
        out.mean_temp
        + out.annual_amplitude * annual
        + out.daily_amplitude * daily
        + temp_noise
    )

    rh_noise = _ar1(_rng(scenario.seed, 2), n, 0.8, out.rh_noise_std)
    rh_out = np.clip(
        out.rh_base
        - out.rh_annual_amplitude * annual
        - out.rh_daily_amplitude * daily
        + rh_noise,
        15.0,
        100.0,
    )
    e_out = rh_out / 100.0 * saturation_vapor_pressure(t_out)
    dew = dew_point(e_out)

    wind_rng = _rng(scenario.seed, 3)
    wind_speed = np.abs(_ar1(wind_rng, n, 0.9, 2.0)) + out.wind_mean * 0.4
    wind_dir = np.mod(
        np.cumsum(wind_rng.standard_normal(n) * 18.0) + wind_rng.uniform(0, 360),
        360.0,
    )

    precip_rng = _rng(scenario.seed, 4)
    wet = precip_rng.random(n) < out.wet_hour_probability * (1.0 - 0.4 * annual)
    precip = np.where(wet, precip_rng.exponential(1.2, n), 0.0)

    cloud_rng = _rng(scenario.seed, 5)
    cloud = np.clip(0.5 + _ar1(cloud_rng, n, 0.9, 0.25), 0.0, 1.0)
    day_len = 12.0 - 6.0 * np.cos(2.0 * math.pi * (h / 24.0 + 10.0) / 365.0)
    sun_angle = np.clip(
        np.sin(math.pi * (local_hours - (12.5 - day_len / 2.0)) / np.maximum(day_len, 1e-6)),
        0.0,
        1.0,
    )
    seasonal_strength = 0.35 + 0.65 * (0.5 + 0.5 * annual)
    irradiance = out.clear_sky_wm2 * seasonal_strength * sun_angle ** 1.5 * (
        1.0 - 0.7 * cloud
    )

    def regular(series_id, unit, values):
        return RegularSeries(
            series_id=series_id,
            unit=unit,
            start=start,
            values=np.asarray(values, dtype=np.float64),
            timezone=tz,
        )

    series = {
        "weather.dryBulbTemperature": regular(
            "weather.dryBulbTemperature", "°C", t_out
        ),
        "weather.relativeHumidity": regular("weather.relativeHumidity", "%RH", rh_out),
        "weather.dewPointTemperature": regular(
            "weather.dewPointTemperature", "°C", dew
        ),
        "weather.precipitation": regular("weather.precipitation", "relative", precip),
        "weather.windSpeed": regular("weather.windSpeed", "relative", wind_speed),
        "weather.windDirection": regular("weather.windDirection", "relative", wind_dir),
        "weather.globalIrradiance": regular(
            "weather.globalIrradiance", "relative", irradiance
        ),
    }

    annotations = []
    for room_index, room in enumerate(scenario.rooms):
        alpha = 1.0 - math.exp(-1.0 / room.tau_hours) if room.tau_hours > 1e-9 else 1.0
        alpha_g = (
            1.0 - math.exp(-1.0 / room.ground_tau_hours)
            if room.ground_tau_hours
            else 0.0
        )
        room_noise = _ar1(
            _rng(scenario.seed, 100 + room_index), n, 0.6, 0.05
        )

        t_in = np.empty(n)
        drive = alpha + alpha_g
        state = (
            (alpha * t_out[0] + alpha_g * out.ground_temp) / drive
            if drive > 0
            else t_out[0]
        )
        if room.heated:
            state = max(state, room.setpoint)
        gain = min(room.heat_gain, 1.0 - drive) if room.heated else 0.0
        for i in range(n):
            state = state + alpha * (t_out[i] - state) + alpha_g * (
                out.ground_temp - state
            )
            if room.heated:
                state = state + gain * max(0.0, room.setpoint - state)
            t_in[i] = state
        t_in = t_in + room.solar_gain * _day_pulse(local_hours) + room_noise

        alpha_m = 1.0 - math.exp(-1.0 / room.moisture_tau_hours)
        e_in = np.empty(n)
        m_state = e_out[0] + room.moisture_source / max(alpha_m, 1e-9)
        for i in range(n):
            m_state = m_state + alpha_m * (e_out[i] - m_state) + room.moisture_source
            e_in[i] = m_state
        rh_in = 100.0 * e_in / saturation_vapor_pressure(t_in)

        co2_noise = _ar1(_rng(scenario.seed, 200 + room_index), n, 0.7, 8.0)
        co2 = room.co2_baseline + 30.0 * _day_pulse(local_hours) + co2_noise

        for event in scenario.events:
            if event.room != room.name:
                continue
            shape = _event_pulse(n, event)
            co2 = co2 + event.co2_amplitude * shape
            t_in = t_in + event.temp_bump * shape
            rh_in = rh_in + event.rh_bump * shape

        rh_in = np.clip(rh_in, 0.0, 100.0)
        co2 = np.maximum(co2, 0.0)

        series[f"{room.name}.temperature"] = regular(
            f"{room.name}.temperature", "°C", t_in
        )
        series[f"{room.name}.relativeHumidity"] = regular(
            f"{room.name}.relativeHumidity", "%RH", rh_in
        )
        series[f"{room.name}.co2"] = regular(f"{room.name}.co2", "ppm", co2)

    for event in scenario.events:
        annotations.append(
            {
                "room": event.room,
                "start_hour": int(event.start_hour),
                "end_hour": int(min(event.start_hour + event.duration_hours, n)),
                "start_epoch": start + int(event.start_hour) * HOUR,
                "end_epoch": start
                + int(min(event.start_hour + event.duration_hours, n)) * HOUR,
                "co2_amplitude": float(event.co2_amplitude),
                "temp_bump": float(event.temp_bump),
                "rh_bump": float(event.rh_bump),
            }
        )
    return GeneratedClimate(scenario=scenario, series=series, annotations=annotations)


def perturbation_report(scenario):
    """Ground-truth event annotations without generating the series."""
    scenario.validate()
    n = scenario.length_hours
    start = scenario.start_epoch()
    return [
        {
            "room": e.room,
            "start_hour": int(e.start_hour),
            "end_hour": int(min(e.start_hour + e.duration_hours, n)),
            "start_epoch": start + int(e.start_hour) * HOUR,
            "end_epoch": start + int(min(e.start_hour + e.duration_hours, n)) * HOUR,
            "co2_amplitude": float(e.co2_amplitude),
            "temp_bump": float(e.temp_bump),
            "rh_bump": float(e.rh_bump),
        }
        for e in scenario.events
    ]


# --- presets --------------------------------------------------------------


def _lofstad_rooms():
    return [
        RoomConfig(
            name="room05",
            floor="BF",
            tau_hours=240.0,
            ground_tau_hours=120.0,
            solar_gain=0.3,
            moisture_source=0.05,
            moisture_tau_hours=80.0,
            co2_baseline=460.0,
        ),
        RoomConfig(name="room3", floor="GF", tau_hours=96.0, solar_gain=0.8),
        RoomConfig(
            name="room103",
            floor="1F",
            tau_hours=96.0,
            heated=True,
            setpoint=17.0,
            solar_gain=0.6,
            co2_baseline=500.0,
        ),
        RoomConfig(name="room205", floor="2F", tau_hours=48.0, solar_gain=1.0),
    ]


def lofstad_like(seed=7, length_hours=8760):
    """Default four-room scenario: buffered basement, heated first floor."""
    return ClimateScenario(
        seed=seed, length_hours=length_hours, rooms=_lofstad_rooms()
    )


def basement(seed=7, length_hours=8760):
    """Single deeply-buffered room under a calm climate."""
    rooms = [_lofstad_rooms()[0]]
    outdoor = OutdoorModel(noise_std=0.9, daily_amplitude=3.0)
    return ClimateScenario(
        seed=seed, length_hours=length_hours, outdoor=outdoor, rooms=rooms
    )


def event_heavy(seed=7, length_hours=8760, gap_hours=400):
    """Default rooms plus recurring occupancy bursts through the whole span,
    so the test segment contains perturbed windows."""
    rng = _rng(seed, 999)
    events = []
    hour = 600
    while hour < length_hours - 48:
        room = "room103" if rng.random() < 0.7 else "room3"
        events.append(
            OccupancyEvent(
                room=room,
                start_hour=int(hour),
                duration_hours=int(rng.integers(4, 10)),
                co2_amplitude=float(rng.uniform(1200.0, 2500.0)),
                temp_bump=float(rng.uniform(1.0, 2.5)),
                rh_bump=float(rng.uniform(3.0, 8.0)),
            )
        )
        hour += int(gap_hours * rng.uniform(0.6, 1.4))
    scenario = ClimateScenario(
        seed=seed, length_hours=length_hours, rooms=_lofstad_rooms(), events=events
    )
    return scenario


PRESETS = {
    "lofstad-like": lofstad_like,
    "basement": basement,
    "event-heavy": event_heavy,
}
