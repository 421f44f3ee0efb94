"""Operator command line: run the server, initialize credentials, seed demo
data, simulate cohorts, export results.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Every flag can
also come from a TEACHEVAL_* environment variable; the flag wins.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import threading
import time
from pathlib import Path
from typing import Optional, Sequence

from .aggregation import OrgMap
from .bank import default_bank, load_bank
from .cohort import ANSWER_MODELS, CohortError, SimulationSpec, format_summary, run_cohort
from .config import DEFAULT_ADDR, ENV_PREFIX, ServiceConfig
from .errors import AccessDenied, AlreadyExists, EvalError
from .store import Store


def _env(name: str, default: Optional[str] = None) -> Optional[str]:
    return os.environ.get(ENV_PREFIX + name, default)


def _env_flag(name: str) -> bool:
    return (_env(name) or "").strip().lower() in ("1", "true", "yes", "on")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="teacheval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_data_dir(p):
        p.add_argument(
            "--data-dir",
            type=Path,
            default=Path(_env("DATA_DIR", "./data")),
            help="store directory (default ./data)",
        )

    p_serve = sub.add_parser("serve", help="run the evaluation service")
    add_data_dir(p_serve)
    p_serve.add_argument("--addr", default=_env("ADDR", DEFAULT_ADDR))
    p_serve.add_argument("--bank", type=Path, default=_env("BANK"), help="bank file (default: shipped bank)")
    p_serve.add_argument("--org-map", type=Path, default=_env("ORG_MAP"))
    p_serve.add_argument("--session-ttl", type=float, default=float(_env("SESSION_TTL", "7200")))
    p_serve.add_argument(
        "--trusted-proxy",
        action="store_true",
        default=_env_flag("TRUSTED_PROXY"),
        help="trust X-Forwarded-For (off by default)",
    )
    p_serve.add_argument("--ui-dir", type=Path, default=_env("UI_DIR"))

    p_admin = sub.add_parser("init-admin", help="store the administrator credential")
    add_data_dir(p_admin)
    p_admin.add_argument("--username", required=True)
    p_admin.add_argument("--password", required=True)
    p_admin.add_argument("--force", action="store_true", help="overwrite an existing credential")

    p_seed = sub.add_parser("seed", help="seed demo teachers, org map, and an active state")
    add_data_dir(p_seed)

    p_sim = sub.add_parser("simulate", help="drive a full cohort through a running server")
    p_sim.add_argument("--url", default=_env("URL", f"http://{DEFAULT_ADDR}"))
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--cohort-size", type=int, required=True)
    p_sim.add_argument("--answer-model", choices=ANSWER_MODELS, default="uniform")

    p_export = sub.add_parser("export", help="dump anonymized results for the committee")
    add_data_dir(p_export)
    p_export.add_argument("--key", required=True, help="privileged access key")
    p_export.add_argument("--format", choices=("csv", "json"), default="csv")
    p_export.add_argument("--teacher", default=None, help="restrict to one teacher")
    p_export.add_argument("--bank", type=Path, default=_env("BANK"))
    p_export.add_argument("--out", type=Path, default=None, help="output file (default stdout)")

    return parser


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import build_context, create_app

    config = ServiceConfig(
        data_dir=args.data_dir,
        addr=args.addr,
        bank_path=args.bank,
        org_map_path=args.org_map,
        session_ttl=args.session_ttl,
        trusted_proxy=args.trusted_proxy,
        ui_dir=args.ui_dir,
    )
    ctx = build_context(config)

    def sweeper():
        while True:
            time.sleep(60)
            try:
                ctx.engine.sweep_stale()
            except Exception:
                pass

    threading.Thread(target=sweeper, daemon=True).start()
    try:
        uvicorn.run(create_app(ctx), host=config.host, port=config.port, log_level="info")
    finally:
        ctx.store.close()
    return 0


def _cmd_init_admin(args) -> int:
    store = Store.open(args.data_dir)
    try:
        store.init_admin(args.username, args.password, force=args.force)
    finally:
        store.close()
    print(f"admin credential stored for {args.username!r}")
    return 0


DEMO_TEACHERS = [
    ("t-101", "Prof. dr. Ana Ionescu", "chair-info", "fac-sci"),
    ("t-102", "Conf. dr. Mihai Pop", "chair-info", "fac-sci"),
    ("t-103", "Lect. dr. Ioana Marin", "chair-math", "fac-sci"),
    ("t-104", "Lect. dr. Radu Stan", "chair-mgmt", "fac-econ"),
]


def _cmd_seed(args) -> int:
    store = Store.open(args.data_dir)
    try:
        for teacher_id, name, chair, faculty in DEMO_TEACHERS:
            try:
                store.put_teacher(name, chair, faculty, teacher_id=teacher_id)
            except AlreadyExists:
                pass  # already seeded
        org = OrgMap(
            university="Universitatea Demo",
            teacher_chair={t: c for t, name, c, f in DEMO_TEACHERS},
            chair_faculty={c: f for t, name, c, f in DEMO_TEACHERS},
        )
        org.save(args.data_dir / "org_map.json")
        store.set_state(
            active=True, selected_teacher=DEMO_TEACHERS[0][0], allowlist=["127.0.0.1"]
        )
    finally:
        store.close()
    print(f"seeded {len(DEMO_TEACHERS)} teachers; evaluation active for {DEMO_TEACHERS[0][0]}")
    return 0


def _cmd_simulate(args) -> int:
    spec = SimulationSpec(
        seed=args.seed, cohort_size=args.cohort_size, answer_model=args.answer_model
    )
    summary = run_cohort(args.url, spec)
    sys.stdout.write(format_summary(summary))
    return 0


def _cmd_export(args) -> int:
    store = Store.open(args.data_dir)
    try:
        role = store.resolve_access_key(args.key)
        if role is None:
            raise AccessDenied("access key not recognized")
        rows = store.list_results(role, args.teacher)
        bank = load_bank(args.bank) if args.bank else default_bank()
        total = len(rows[0].answers) if rows else len(bank.items)
        if args.format == "json":
            text = json.dumps(
                [
                    {
                        "result_id": r.result_id,
                        "teacher_id": r.teacher_id,
                        "completed_at": r.completed_at.isoformat(),
                        "answers": list(r.answers),
                    }
                    for r in rows
                ],
                indent=2,
            ) + "\n"
        else:
            buf = io.StringIO()
            writer = csv.writer(buf)
            writer.writerow(
                ["result_id", "teacher_id", "completed_at"]
                + [f"a{i}" for i in range(1, total + 1)]
            )
            for r in rows:
                writer.writerow([r.result_id, r.teacher_id, r.completed_at.isoformat()] + list(r.answers))
            text = buf.getvalue()
    finally:
        store.close()
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "serve": _cmd_serve,
    "init-admin": _cmd_init_admin,
    "seed": _cmd_seed,
    "simulate": _cmd_simulate,
    "export": _cmd_export,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (EvalError, CohortError, OSError, ValueError) as exc:
        print(f"teacheval {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
