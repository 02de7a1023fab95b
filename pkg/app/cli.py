"""Командная строка: python -m app.cli <command> ..."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from app.core.config import Settings, get_settings
from app.core.errors import CoreError, InputError
from app.core.logging import setup_logging
from app.schemas.graph import GraphMapSchema, MarkedGraphSchema
from app.schemas.surgery import ReplaySchema
from app.services.core_builder import QuotientCore, build_core, product_core
from app.services.exporters import dumps, export_core, read_json, write_dot, write_json
from app.services.oracle import oracle_core
from app.services.pipeline import core_summary, load_pair, morphism_for, rectangles_of, run_surgery, surgery_payload
from app.services.surgery_engine import verify_fellow_traveling, verify_theorem_2

logger = logging.getLogger("app.cli")

EXIT_OK, EXIT_UNCERTIFIED, EXIT_ERROR = 0, 1, 2


def _settings(args: argparse.Namespace) -> Settings:
    return get_settings(
        policy=getattr(args, "policy", None),
        seed=getattr(args, "seed", None),
        depth=getattr(args, "depth", None),
        period=getattr(args, "period", None),
        ball_cap=getattr(args, "ball_cap", None),
        window=getattr(args, "window", None),
        oracle_band=getattr(args, "band", None),
        out=getattr(args, "out", None),
        log_level=getattr(args, "log_level", None),
    )


def _graph_schema(path: str) -> MarkedGraphSchema:
    data = read_json(Path(path))
    if not isinstance(data, dict):
        raise InputError("Marked graph must be a JSON object", {"path": path})
    data.setdefault("name", Path(path).stem)
    return MarkedGraphSchema.model_validate(data)


def _pair(args: argparse.Namespace) -> tuple:
    return load_pair(_graph_schema(args.source), _graph_schema(args.target))


def _map(args: argparse.Namespace) -> Optional[GraphMapSchema]:
    if not getattr(args, "map", None):
        return None
    return GraphMapSchema.model_validate(read_json(Path(args.map)))


def _emit(data: dict) -> None:
    sys.stdout.write(dumps(data))


def cmd_build_core(args: argparse.Namespace, settings: Settings) -> int:
    graph, target = _pair(args)
    core = build_core(morphism_for(graph, target, _map(args)))
    rectangles = rectangles_of(core)
    export_core(Path(settings.out), core, "core", rectangles)
    summary = core_summary(core)
    summary["hulls"] = core.hulls
    summary["rectangles"] = len(rectangles)
    _emit(summary)
    return EXIT_OK


def cmd_surgery(args: argparse.Namespace, settings: Settings) -> int:
    graph, target = _pair(args)
    replay = None
    if args.replay:
        replay = ReplaySchema.model_validate(read_json(Path(args.replay))).model_dump()
    states, settings = run_surgery(graph, target, settings, replay)
    payload = surgery_payload(states, settings)
    out = Path(settings.out)
    write_json(out / "surgery.json", payload)
    write_json(out / "replay.json", payload["replay"])
    export_core(out, states[0].core, "core_0", rectangles_of(states[0].core))
    _emit({"areas": payload["areas"], "steps": len(states) - 1})
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    graph, target = _pair(args)
    seeds = [settings.seed] if args.seed2 is None else [settings.seed, args.seed2]
    report = verify_fellow_traveling(
        graph, target, settings.policy, seeds, settings, cross_check=args.cross_check, strict=False
    )
    data = report.to_dict()
    data["config"] = dict(data["config"], **settings.model_dump())
    write_json(Path(settings.out) / "fellow_traveling.json", data)
    _emit({"certified": report.certified, "entries": len(report.entries), "monotone": report.monotone})
    return EXIT_OK if report.certified else EXIT_UNCERTIFIED


def cmd_verify_chained(args: argparse.Namespace, settings: Settings) -> int:
    graph, target = _pair(args)
    seed2 = settings.seed + 1 if args.seed2 is None else args.seed2
    report = verify_theorem_2(graph, target, settings.seed, seed2, settings, strict=False)
    data = report.to_dict()
    data["config"] = dict(data["config"], **settings.model_dump())
    write_json(Path(settings.out) / "chained.json", data)
    _emit({"certified": report.certified, "entries": len(report.entries)})
    return EXIT_OK if report.certified else EXIT_UNCERTIFIED


def cmd_oracle(args: argparse.Namespace, settings: Settings) -> int:
    graph, target = _pair(args)
    morphism = morphism_for(graph, target, _map(args))
    report = oracle_core(morphism, settings)
    data = report.to_dict()
    data["agrees_with_core"] = report.agrees_with(build_core(morphism))
    write_json(Path(settings.out) / "oracle.json", data)
    _emit({"squares": len(report.squares), "inconclusive": len(report.inconclusive), "agrees_with_core": data["agrees_with_core"]})
    return EXIT_OK


def _load_core(path: str) -> QuotientCore:
    data = read_json(Path(path))
    if "squares" in data and "cells" not in data:
        return product_core(data)
    return QuotientCore.from_dict(data)


def cmd_export_dot(args: argparse.Namespace, settings: Settings) -> int:
    core = _load_core(args.core)
    rectangles = rectangles_of(core)
    target = Path(settings.out) / f"{Path(args.core).stem}.dot"
    write_dot(target, core, rectangles)
    _emit({"dot": str(target), "area": core.area, "rectangles": len(rectangles)})
    return EXIT_OK


def _add_pair(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("source", help="маркированный граф G (JSON)")
    parser.add_argument("target", help="маркированный граф Γ (JSON)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--policy", choices=["canonical", "seeded"])
    common.add_argument("--seed", type=int)
    common.add_argument("--depth", type=int)
    common.add_argument("--period", type=int)
    common.add_argument("--ball-cap", dest="ball_cap", type=int)
    common.add_argument("--out")
    common.add_argument("--log-level", dest="log_level")

    parser = argparse.ArgumentParser(prog="coresurgery", description="Ядра Гирарделя и хирургии свободных расщеплений")
    commands = parser.add_subparsers(dest="command", required=True)

    build = commands.add_parser("build-core", parents=[common], help="построить ядро")
    _add_pair(build)
    build.add_argument("--map", help="готовое отображение G -> Γ (JSON)")
    build.set_defaults(handler=cmd_build_core)

    surgery = commands.add_parser("surgery", parents=[common], help="последовательность хирургий")
    _add_pair(surgery)
    surgery.add_argument("--replay", help="файл воспроизведения")
    surgery.set_defaults(handler=cmd_surgery)

    verify = commands.add_parser("verify-fellow-traveling", parents=[common], help="сертификаты расстояния 2")
    _add_pair(verify)
    verify.add_argument("--seed2", type=int, help="сид обратной последовательности")
    verify.add_argument("--cross-check", dest="cross_check", action="store_true")
    verify.set_defaults(handler=cmd_verify)

    chained = commands.add_parser("verify-theorem2", parents=[common], help="сцепленные сертификаты расстояния 4")
    _add_pair(chained)
    chained.add_argument("--seed2", type=int)
    chained.set_defaults(handler=cmd_verify_chained)

    oracle = commands.add_parser("oracle", parents=[common], help="проверка квадратов перебором лучей")
    _add_pair(oracle)
    oracle.add_argument("--map")
    oracle.add_argument("--window", type=int)
    oracle.add_argument("--band", type=int, help="ширина полосы вокруг оболочки")
    oracle.set_defaults(handler=cmd_oracle)

    dot = commands.add_parser("export-dot", parents=[common], help="DOT по JSON ядра")
    dot.add_argument("core", help="ядро (JSON) или явный список квадратов")
    dot.set_defaults(handler=cmd_export_dot)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        try:
            settings = _settings(args)
            setup_logging(settings.log_level)
            logger.info("Command %s started", args.command)
            status = args.handler(args, settings)
        except ValidationError as exc:
            raise InputError("Invalid input document", {"errors": json.loads(exc.json())})
    except CoreError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
        logger.error("Command %s failed: %s", args.command, exc.message)
        return EXIT_ERROR
    logger.info("Command %s finished with status %d", args.command, status)
    return status


if __name__ == "__main__":
    sys.exit(main())
