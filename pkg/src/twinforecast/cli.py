"""Operator CLI tying the toolkit into the edge workflow:
generate -> ingest -> twin -> preprocess -> train -> evaluate -> bench -> serve.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ProjectConfig
from .errors import TwinForecastError
from .evalbench import bench_inference, export_report, rolling_evaluate
from .features import parse_holidays
from .forecasters import (
    ARCHITECTURES,
    EXCLUDED_ARCHITECTURES,
    ForecastTask,
    TrainerConfig,
    build_model,
    load_forecaster,
    registry_checkpoint_path,
    registry_report_path,
    save_train_report,
    train,
)
from .pipeline import DatasetBundle, build_dataset
from .series import (
    ValidityBounds,
    drop_invalid,
    fill_gaps_linear,
    ingest_csv,
    resample_hourly_mean,
    write_series_csv,
)
from .synthdata import PRESETS, ClimateScenario, OccupancyEvent, OutdoorModel, RoomConfig, generate
from .twin import (
    Entity,
    Relationship,
    SeriesBinding,
    TwinGraph,
    dumps_graph,
    load_graph,
)
from .weather import WEATHER_VARIABLES, fetch_weather


def _load_catalog(config):
    if config.catalog_path.exists():
        return json.loads(config.catalog_path.read_text(encoding="utf-8"))
    return {}


def _save_catalog(config, catalog):
    config.data_dir.mkdir(parents=True, exist_ok=True)
    config.catalog_path.write_text(
        json.dumps(catalog, indent=2, sort_keys=True), encoding="utf-8"
    )


def _persist_series(config, series, catalog):
    config.series_dir.mkdir(parents=True, exist_ok=True)
    path = config.series_dir / f"{series.series_id}.csv"
    write_series_csv(series, path)
    catalog[series.series_id] = {
        "path": str(path.relative_to(config.data_dir)),
        "unit": series.unit,
        "timezone": series.timezone,
        "start": series.start,
        "length": len(series),
    }
    return path


def _load_regular(config, series_id):
    from .series import RegularSeries

    catalog = _load_catalog(config)
    if series_id not in catalog:
        raise TwinForecastError(
            f"series {series_id!r} is not in the catalog; ingest or generate it first"
        )
    entry = catalog[series_id]
    path = config.data_dir / entry["path"]
    stamps = []
    values = []
    import csv as _csv
    from .series import parse_timestamp
    from .features import _zone

    with open(path, encoding="utf-8") as fh:
        for row in _csv.DictReader(fh):
            stamps.append(parse_timestamp(row["timestamp"], _zone("UTC")))
            values.append(float(row["value"]))
    return RegularSeries(
        series_id=series_id,
        unit=entry["unit"],
        start=int(stamps[0]),
        values=np.asarray(values),
        timezone=entry["timezone"],
    )


# --- subcommands ----------------------------------------------------------


def cmd_generate(config, args):
    if args.scenario in PRESETS:
        scenario = PRESETS[args.scenario](seed=args.seed, length_hours=args.length)
    else:
        doc = json.loads(Path(args.scenario).read_text(encoding="utf-8"))
        doc.setdefault("seed", args.seed)
        doc.setdefault("length_hours", args.length)
        scenario = ClimateScenario(
            seed=doc["seed"],
            length_hours=doc["length_hours"],
            start=doc.get("start", "2023-01-01T00:00"),
            timezone=doc.get("timezone", "Europe/Stockholm"),
            outdoor=OutdoorModel(**doc.get("outdoor", {})),
            rooms=[RoomConfig(**r) for r in doc.get("rooms", [])],
            events=[OccupancyEvent(**e) for e in doc.get("events", [])],
        )
    climate = generate(scenario)
    catalog = _load_catalog(config)
    for series in climate.series.values():
        _persist_series(config, series, catalog)
    _save_catalog(config, catalog)
    config.data_dir.mkdir(parents=True, exist_ok=True)
    (config.data_dir / "annotations.json").write_text(
        json.dumps(climate.annotations, indent=2), encoding="utf-8"
    )
    print(f"generated {len(climate.series)} series of {scenario.length_hours} h "
          f"(seed {scenario.seed}) into {config.data_dir}")
    return 0


def cmd_ingest(config, args):
    catalog = _load_catalog(config)
    if args.weather:
        series_list = fetch_weather(args.weather, timezone=config.timezone)
        for raw in series_list:
            masked = resample_hourly_mean(raw)
            regular = fill_gaps_linear(masked, max_gap=args.max_gap)
            _persist_series(config, regular, catalog)
        _save_catalog(config, catalog)
        print(f"ingested {len(series_list)} weather series from {args.weather}")
        return 0
    if not args.file or not args.series_id:
        print("ingest needs either --weather or --file with --series-id", file=sys.stderr)
        return 1
    raw, report = ingest_csv(
        args.file, timezone=config.timezone, series_id=args.series_id, unit=args.unit
    )
    raw, removed = drop_invalid(raw, ValidityBounds.for_unit(args.unit))
    masked = resample_hourly_mean(raw)
    regular = fill_gaps_linear(masked, max_gap=args.max_gap)
    _persist_series(config, regular, catalog)
    _save_catalog(config, catalog)
    print(
        f"ingested {args.series_id}: {report.rows_read} rows, "
        f"{report.duplicates_dropped} duplicates dropped, {removed} invalid removed, "
        f"{len(regular)} hourly values"
    )
    return 0


def default_twin():
    """Four-floor, four-room twin matching the synthetic generator's ids."""
    graph = TwinGraph()
    graph.add_entity(Entity("lofstad-main", "Building", "Main building"))
    floors = {"BF": "floor-bf", "GF": "floor-gf", "1F": "floor-1f", "2F": "floor-2f"}
    for tag, fid in floors.items():
        graph.add_entity(Entity(fid, "Floor", f"Floor {tag}", {"level": tag}))
        graph.add_relation(Relationship("lofstad-main", "hasPart", fid))
    rooms = {
        "room05": ("BF", {"heated": False}),
        "room3": ("GF", {"heated": False}),
        "room103": ("1F", {"heated": True}),
        "room205": ("2F", {"heated": False}),
    }
    sensors = (
        ("temperature", "TemperatureSensor", "°C"),
        ("relativeHumidity", "HumiditySensor", "%RH"),
        ("co2", "CO2Sensor", "ppm"),
    )
    for room, (floor, attrs) in rooms.items():
        graph.add_entity(Entity(room, "Room", f"Room {room[4:]}", dict(attrs)))
        graph.add_relation(Relationship(floors[floor], "hasPart", room))
        for variable, cls, unit in sensors:
            sid = f"{room}-{variable}"
            graph.add_entity(Entity(sid, cls, f"{room} {variable}"))
            graph.add_relation(Relationship(sid, "isPointOf", room))
            graph.bind_series(SeriesBinding(sid, f"{room}.{variable}", unit))
    graph.add_entity(Entity("station", "OutdoorWeatherStation", "Weather station"))
    graph.add_relation(Relationship("station", "isPointOf", "lofstad-main"))
    for name in WEATHER_VARIABLES:
        unit = "°C" if name.endswith("Temperature") else (
            "%RH" if name == "relativeHumidity" else "relative"
        )
        graph.bind_series(SeriesBinding("station", f"weather.{name}", unit))
    graph.add_entity(Entity("heating-1f", "HeatingSystem", "Electric radiant heating"))
    graph.add_relation(Relationship("heating-1f", "feeds", "room103"))
    graph.add_relation(Relationship("heating-1f", "hasLocation", "floor-1f"))
    return graph


def cmd_twin(config, args):
    if args.action == "init":
        graph = default_twin()
        config.twin_path.parent.mkdir(parents=True, exist_ok=True)
        config.twin_path.write_text(dumps_graph(graph), encoding="utf-8")
        print(f"wrote twin with {len(graph.entities)} entities to {config.twin_path}")
        return 0
    document = Path(args.path or config.twin_path).read_text(encoding="utf-8")
    graph = load_graph(document)
    if args.action == "validate":
        print(
            f"twin OK: {len(graph.entities)} entities, {len(graph.relations)} "
            f"relations, {len(graph.bindings)} bindings"
        )
        return 0
    # show
    for entity in sorted(graph.entities.values(), key=lambda e: e.id):
        bound = [b.series_id for b in graph.bindings if b.point_id == entity.id]
        suffix = f" -> {', '.join(bound)}" if bound else ""
        print(f"{entity.id} [{entity.entity_class}] {entity.label}{suffix}")
    return 0


def _weather_series(config):
    out = {}
    for name in WEATHER_VARIABLES:
        out[name] = _load_regular(config, f"weather.{name}")
    return out


def cmd_preprocess(config, args):
    target = _load_regular(config, args.target)
    holidays = parse_holidays(config.holidays_text())
    bundle = build_dataset(
        target,
        _weather_series(config),
        holidays,
        lookback=args.lookback,
        horizon=args.horizon,
        stride=args.stride,
    )
    config.dataset_dir.mkdir(parents=True, exist_ok=True)
    out = config.dataset_dir / args.target
    bundle.save(out)
    sizes = {k: len(v) for k, v in bundle.splits.items()}
    print(f"dataset {args.target}: windows {sizes}, manifest {len(bundle.manifest)} covariates")
    if bundle.degenerate:
        print(f"warning: degenerate scaler range for {', '.join(bundle.degenerate)}")
    return 0


def _load_bundle(config, target):
    path = config.dataset_dir / target
    if not path.with_suffix(".json").exists():
        raise TwinForecastError(
            f"no preprocessed dataset for {target!r}; run preprocess first"
        )
    return DatasetBundle.load(path)


def cmd_train(config, args):
    arch = args.arch.upper()
    if arch in EXCLUDED_ARCHITECTURES:
        print(f"error: {EXCLUDED_ARCHITECTURES[arch]}", file=sys.stderr)
        return 1
    if arch not in ARCHITECTURES:
        print(
            f"error: unknown architecture {args.arch!r}; choose from "
            f"{', '.join(sorted(ARCHITECTURES))}",
            file=sys.stderr,
        )
        return 1
    bundle = _load_bundle(config, args.target)
    task = ForecastTask.from_bundle(bundle)
    hyper = json.loads(args.hyper) if args.hyper else None
    model = build_model(arch, task, hyper=hyper, seed=args.seed)
    model.target_scaler = bundle.target_scaler
    config.registry_dir.mkdir(parents=True, exist_ok=True)
    ckpt = registry_checkpoint_path(config.registry_dir, args.target, arch)
    if arch == "SN24":
        model.save(ckpt)
        print(f"SN24 needs no training; checkpoint at {ckpt}")
        return 0
    trainer_config = TrainerConfig(
        max_epochs=args.max_epochs,
        patience=args.patience,
        batch_size=args.batch_size,
        seed=args.seed,
        learning_rate=args.learning_rate,
    )
    report = train(model, bundle.splits["train"], bundle.splits["valid"], trainer_config)
    model.save(ckpt)
    save_train_report(registry_report_path(ckpt), report)
    print(
        f"trained {arch} on {args.target}: {report.epochs_run} epochs "
        f"(best {report.best_epoch}, val mse {min(report.valid_curve):.3g}), "
        f"{report.wall_time_s:.1f}s; checkpoint at {ckpt}"
    )
    return 0


def cmd_evaluate(config, args):
    bundle = _load_bundle(config, args.target)
    ckpt = registry_checkpoint_path(config.registry_dir, args.target, args.arch.upper())
    if not Path(ckpt).exists():
        raise TwinForecastError(f"no checkpoint at {ckpt}; train first")
    model = load_forecaster(ckpt)
    report = rolling_evaluate(model, bundle, split=args.split, stride=args.stride)
    config.report_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{args.target}__{args.arch.lower()}__{args.split}"
    json_path = config.report_dir / f"{stem}.json"
    csv_path = config.report_dir / f"{stem}.csv"
    export_report(report, json_path, csv_path)
    flag = "PASS" if report.passes_criteria else "FAIL"
    print(
        f"{args.arch.upper()} on {args.target} [{args.split}]: "
        f"CV-RMSE {report.pooled_cv_rmse:.2f}% NMBE {report.pooled_nmbe:+.2f}% "
        f"({flag} vs CV-RMSE<=20%, |NMBE|<=5%); report at {json_path}"
    )
    return 0


def cmd_bench(config, args):
    bundle = _load_bundle(config, args.target)
    ckpt = registry_checkpoint_path(config.registry_dir, args.target, args.arch.upper())
    if not Path(ckpt).exists():
        raise TwinForecastError(f"no checkpoint at {ckpt}; train first")
    model = load_forecaster(ckpt)
    split = "test" if len(bundle.splits["test"]) else "train"
    sample = bundle.sample(split, 0)
    stats = bench_inference(
        model, sample, runs=args.runs, warmup=args.warmup, hardware=config.hardware
    )
    config.report_dir.mkdir(parents=True, exist_ok=True)
    out = config.report_dir / f"{args.target}__{args.arch.lower()}__latency.json"
    out.write_text(json.dumps(stats.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
    print(
        f"{args.arch.upper()} single-window inference: "
        f"{stats.mean_ms:.2f} ms +/- {stats.std_ms:.2f} ms over {stats.runs} runs; "
        f"saved {out}"
    )
    return 0


def cmd_serve(config, args):
    from .serve import run_server

    return run_server(config, port=args.port or config.serve_port)


def make_parser():
    parser = argparse.ArgumentParser(
        prog="twinforecast",
        description="Edge toolkit for building twins and indoor climate forecasting",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", default=None, help="project config JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic climate dataset")
    p.add_argument("--scenario", default="lofstad-like")
    p.add_argument("--length", type=int, default=8760)
    p.add_argument("--seed", type=int, default=7)

    p = sub.add_parser("ingest", help="ingest a raw CSV or a weather connector")
    p.add_argument("--file")
    p.add_argument("--series-id")
    p.add_argument("--unit", default="°C")
    p.add_argument("--weather", help="connector, e.g. file:fixture.json or http://...")
    p.add_argument("--max-gap", type=int, default=6)

    p = sub.add_parser("twin", help="manage the twin document")
    p.add_argument("action", choices=("init", "show", "validate"))
    p.add_argument("--path")

    p = sub.add_parser("preprocess", help="build a model-ready dataset")
    p.add_argument("--target", required=True)
    p.add_argument("--lookback", type=int, default=168)
    p.add_argument("--horizon", type=int, default=24)
    p.add_argument("--stride", type=int, default=1)

    p = sub.add_parser("train", help="train one architecture on one target")
    p.add_argument("--target", required=True)
    p.add_argument("--arch", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--hyper", help="JSON hyperparameter overrides")

    p = sub.add_parser("evaluate", help="rolling-origin evaluation")
    p.add_argument("--target", required=True)
    p.add_argument("--arch", required=True)
    p.add_argument("--split", default="test", choices=("train", "valid", "test"))
    p.add_argument("--stride", type=int, default=1)

    p = sub.add_parser("bench", help="single-window inference latency")
    p.add_argument("--target", required=True)
    p.add_argument("--arch", required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--warmup", type=int, default=10)

    p = sub.add_parser("serve", help="run the edge HTTP service")
    p.add_argument("--port", type=int)

    return parser


COMMANDS = {
    "generate": cmd_generate,
    "ingest": cmd_ingest,
    "twin": cmd_twin,
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
    "serve": cmd_serve,
}


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        config = ProjectConfig.load(args.config)
        return COMMANDS[args.command](config, args)
    except TwinForecastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # noqa: BLE001 - surface as internal error
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
