"""Project configuration for the CLI and serve mode."""

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ParseError, UnknownTimezoneError
from .features import _zone


@dataclass
class ProjectConfig:
    root: Path
    data_dir: Path
    twin_path: Path
    timezone: str
    holiday_file: Path  # None selects the bundled Swedish calendar
    registry_dir: Path
    serve_port: int
    hardware: str

    @classmethod
    def load(cls, path=None):
        if path is None:
            root = Path.cwd()
            raw = {}
        else:
            path = Path(path)
            if not path.exists():
                raise ParseError(f"config file {path} does not exist")
            try:
                raw = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, line=exc.lineno) from exc
            root = path.parent.resolve()
        timezone = raw.get("timezone", "Europe/Stockholm")
        try:
            _zone(timezone)
        except UnknownTimezoneError:
            raise
        holiday = raw.get("holiday_file")
        return cls(
            root=root,
            data_dir=root / raw.get("data_dir", "data"),
            twin_path=root / raw.get("twin_path", "twin.json"),
            timezone=timezone,
            holiday_file=(root / holiday) if holiday else None,
            registry_dir=root / raw.get("registry_dir", "models"),
            serve_port=int(raw.get("serve_port", 8787)),
            hardware=raw.get("hardware", "unspecified"),
        )

    @property
    def series_dir(self):
        return self.data_dir / "series"

    @property
    def dataset_dir(self):
        return self.data_dir / "datasets"

    @property
    def report_dir(self):
        return self.data_dir / "reports"

    @property
    def catalog_path(self):
        return self.data_dir / "catalog.json"

    def holidays_text(self):
        if self.holiday_file is not None:
            return Path(self.holiday_file).read_text(encoding="utf-8")
        return (
            resources.files("twinforecast.data")
            .joinpath("holidays_se.txt")
            .read_text(encoding="utf-8")
        )
