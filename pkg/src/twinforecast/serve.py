"""Edge HTTP service: health, twin document, forecasts, latest insights.

JSON over HTTP/1.1 on a threading server, so one slow inference cannot
block other requests.  The model registry is loaded once at startup and is
immutable afterwards; changing models means restarting the process.
"""

import json
import threading
from datetime import datetime, timezone as dt_timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import __version__
from .autodiff.checkpoint import file_sha256
from .errors import TwinForecastError
from .forecasters import load_forecaster
from .pipeline import DatasetBundle
from .series import HOUR
from .twin import load_graph

API_VERSION = 1

VARIABLE_CLASSES = {
    "temperature": "TemperatureSensor",
    "relativeHumidity": "HumiditySensor",
    "co2": "CO2Sensor",
}

ARCH_PREFERENCE = ("TIDE", "NHITS", "TCN", "LSTM", "SN24")


class EdgeState:
    """Twin, datasets and models shared (read-only once ready) by handlers."""

    def __init__(self, config):
        self.config = config
        self.ready = False
        self.error = None
        self.twin = None
        self.twin_document = None
        self.bundles = {}
        self.models = {}  # (series_id, arch) -> (model, checksum)

    def load(self):
        try:
            text = Path(self.config.twin_path).read_text(encoding="utf-8")
            self.twin = load_graph(text)
            self.twin_document = json.loads(text)
            if self.config.dataset_dir.exists():
                for meta in sorted(self.config.dataset_dir.glob("*.json")):
                    bundle = DatasetBundle.load(meta.with_suffix(""))
                    self.bundles[bundle.target_name] = bundle
            if self.config.registry_dir.exists():
                for ckpt in sorted(self.config.registry_dir.glob("*.tfwt")):
                    model = load_forecaster(ckpt)
                    key = (model.task.target_name, model.tag)
                    self.models[key] = (model, file_sha256(ckpt))
            self.ready = True
        except Exception as exc:  # noqa: BLE001 - surfaced via /health
            self.error = repr(exc)

    def resolve_series(self, room, target):
        if target not in VARIABLE_CLASSES:
            raise LookupError(f"unknown target variable {target!r}")
        points = self.twin.query_points(room, VARIABLE_CLASSES[target])
        for point in points:
            for binding in self.twin.bindings_for(point.id):
                return binding.series_id
        raise LookupError(f"no {target} sensor bound under {room!r}")

    def pick_model(self, series_id, arch=None):
        if arch is not None:
            key = (series_id, arch.upper())
            if key in self.models:
                return self.models[key]
            raise LookupError(f"no {arch} model for {series_id!r}")
        for tag in ARCH_PREFERENCE:
            key = (series_id, tag)
            if key in self.models:
                return self.models[key]
        raise LookupError(f"no model in the registry for {series_id!r}")

    def find_window(self, series_id, origin_epoch):
        bundle = self.bundles.get(series_id)
        if bundle is None:
            raise LookupError(f"no preprocessed dataset for {series_id!r}")
        for split in ("test", "valid", "train"):
            ds = bundle.splits[split]
            epochs = bundle.start + ds.origins.astype(np.int64) * HOUR
            hits = np.nonzero(epochs == origin_epoch)[0]
            if len(hits):
                return bundle.sample(split, int(hits[0]))
        raise ValueError(
            f"origin is not an available forecast origin for {series_id!r}"
        )


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    state: EdgeState = None

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, code, payload):
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _not_ready(self):
        status = {"api_version": API_VERSION, "status": "loading"}
        if self.state.error:
            status["status"] = "error"
            status["detail"] = self.state.error
        self._send(503, status)

    def do_GET(self):
        if self.path == "/health":
            payload = {
                "api_version": API_VERSION,
                "version": __version__,
                "status": "ready" if self.state.ready else "loading",
                "models": sorted(f"{s}:{a}" for s, a in self.state.models),
            }
            if self.state.error:
                payload["status"] = "error"
                payload["detail"] = self.state.error
            self._send(200, payload)
            return
        if not self.state.ready:
            self._not_ready()
            return
        if self.path == "/twin":
            self._send(200, self.state.twin_document)
            return
        if self.path == "/insights":
            reports = sorted(self.state.config.report_dir.glob("*.json"))
            if not reports:
                self._send(404, {"api_version": API_VERSION, "error": "no insights yet"})
                return
            latest = max(reports, key=lambda p: (p.stat().st_mtime, p.name))
            self._send(200, json.loads(latest.read_text(encoding="utf-8")))
            return
        self._send(404, {"api_version": API_VERSION, "error": "unknown path"})

    def do_POST(self):
        if self.path != "/forecast":
            self._send(404, {"api_version": API_VERSION, "error": "unknown path"})
            return
        if not self.state.ready:
            self._not_ready()
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            request = json.loads(self.rfile.read(length).decode("utf-8"))
            room = request["room"]
            target = request["target"]
            origin = request["origin"]
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            self._send(400, {"api_version": API_VERSION, "error": f"bad request: {exc}"})
            return
        try:
            origin_epoch = int(
                datetime.fromisoformat(str(origin).replace("Z", "+00:00")).timestamp()
            )
        except ValueError as exc:
            self._send(400, {"api_version": API_VERSION, "error": f"bad origin: {exc}"})
            return
        try:
            series_id = self.state.resolve_series(room, target)
            model, checksum = self.state.pick_model(series_id, request.get("arch"))
            sample = self.state.find_window(series_id, origin_epoch)
        except (LookupError, TwinForecastError) as exc:
            self._send(404, {"api_version": API_VERSION, "error": str(exc)})
            return
        except ValueError as exc:
            self._send(400, {"api_version": API_VERSION, "error": str(exc)})
            return
        values = model.predict(sample)
        points = [
            {
                "timestamp": datetime.fromtimestamp(
                    origin_epoch + step * HOUR, dt_timezone.utc
                ).isoformat(),
                "value": float(v),
            }
            for step, v in enumerate(values)
        ]
        self._send(
            200,
            {
                "api_version": API_VERSION,
                "room": room,
                "target": target,
                "series": series_id,
                "model": model.tag,
                "checksum": checksum,
                "origin": str(origin),
                "points": points,
            },
        )


class EdgeServer:
    """Wraps ThreadingHTTPServer with background model loading."""

    def __init__(self, config, port=0):
        self.state = EdgeState(config)
        handler = type("BoundHandler", (_Handler,), {"state": self.state})
        self.httpd = ThreadingHTTPServer(("127.0.0.1", port), handler)
        self.httpd.daemon_threads = True
        self._threads = []

    @property
    def port(self):
        return self.httpd.server_address[1]

    def start(self, block_until_ready=False):
        loader = threading.Thread(target=self.state.load, daemon=True)
        loader.start()
        runner = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        runner.start()
        self._threads = [loader, runner]
        if block_until_ready:
            loader.join()
        return self

    def stop(self):
        self.httpd.shutdown()
        self.httpd.server_close()


def run_server(config, port):
    server = EdgeServer(config, port=port)
    server.state.load()
    if server.state.error:
        print(f"error: failed to load state: {server.state.error}")
        return 1
    print(
        f"serving on http://127.0.0.1:{server.port} with "
        f"{len(server.state.models)} model(s); Ctrl-C to stop"
    )
    try:
        server.httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0
