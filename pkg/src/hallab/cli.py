"""hal: command line entry points.

    hal run <scenario> [--mode auto|manual] [--seed N] [--report path]
    hal serve-lab --config file [--listen host:port]
    hal gateway [--listen host:port] [--storage dir] [--console dir]
    hal kb list|add|search ... --dir knowledge_dir
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
import time
from pathlib import Path

from .kb import KnowledgeBase
from .scenarios import (list_bundles, load_bundle, prepare_rig, report_json,
                        run_auto, run_knowledge_prep, run_manual,
                        run_power_sweep)
from .scenarios.runners import build_report
from .virtlab import LabConfig, Storage, serve


def _parse_endpoint(text: str):
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def cmd_run(args) -> int:
    bundle = load_bundle(args.scenario)
    seed = bundle.default_seed if args.seed is None else args.seed
    storage_dir = args.storage or tempfile.mkdtemp(prefix="hal-storage-")
    storage = Storage(storage_dir)

    if bundle.kind == "power":
        report = run_power_sweep(bundle, seed=seed, storage=storage)
    else:
        rig = prepare_rig(bundle, seed=seed, storage=storage, mode=args.mode)
        run_knowledge_prep(rig)
        if args.mode == "manual":
            run_manual(rig, _console_approver(args))
        else:
            run_auto(rig)
        report = build_report(rig)

    text = report_json(report)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
        print(f"report written to {args.report}")
    for assertion in report["assertions"]:
        mark = "PASS" if assertion["passed"] else "FAIL"
        print(f"[{mark}] {assertion['name']}: {assertion['detail']}")
    print(f"scenario {report['scenario']} seed {report['seed']}: "
          + ("PASS" if report["passed"] else "FAIL"))
    return 0 if report["passed"] else 1


def _console_approver(args):
    def approver(record) -> bool:
        print(f"\n-- step {record.index}: {record.signal_description}")
        print(record.script_source)
        if args.yes:
            print("approved (--yes)")
            return True
        answer = input(f"approve step {record.index}? [y/N] ")
        return answer.strip().lower() in ("y", "yes")

    return approver


def cmd_serve_lab(args) -> int:
    config = LabConfig.from_dict(
        json.loads(Path(args.config).read_text(encoding="utf-8")))
    server = serve(config, _parse_endpoint(args.listen))
    host, port = server.server_address
    print(f"lab service on {host}:{port} "
          f"({len(config.resonators)} resonators); Ctrl-C stops")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def cmd_gateway(args) -> int:
    from .gateway import SessionManager, serve_gateway

    storage_dir = args.storage or tempfile.mkdtemp(prefix="hal-storage-")
    manager = SessionManager(storage_dir)
    host, port = _parse_endpoint(args.listen)
    server = serve_gateway(manager, host, port, static_root=args.console)
    host, port = server.server_address
    print(f"gateway on http://{host}:{port}/ (storage: {storage_dir})")
    if args.console:
        print(f"console served from {args.console}")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def cmd_kb(args) -> int:
    directory = Path(args.dir)
    if directory.exists():
        kb = KnowledgeBase.load_dir(directory)
    else:
        kb = KnowledgeBase()

    if args.kb_command == "list":
        for doc in sorted(kb.documents(), key=lambda d: d.id):
            print(f"{doc.id}\t{doc.kind}\t{doc.title}")
        for doc_id, ref in kb.lint():
            print(f"warning: {doc_id} references missing document {ref}",
                  file=sys.stderr)
    elif args.kb_command == "add":
        body = Path(args.file).read_text(encoding="utf-8")
        kb.add_document(args.id, args.title, args.kind, body,
                        args.refs.split(",") if args.refs else [])
        kb.save_dir(directory)
        print(f"added {args.id}")
    elif args.kb_command == "search":
        for doc_id, score in kb.search_text(args.task, args.k):
            doc = kb.get(doc_id)
            print(f"{score:+.4f}  {doc_id}  {doc.title}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hal", description="autonomous-lab orchestration")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scripted scenario")
    run.add_argument("scenario", choices=list_bundles())
    run.add_argument("--mode", choices=("auto", "manual"), default="auto")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--report", help="write the JSON report here")
    run.add_argument("--storage", help="dataset directory (default: temp)")
    run.add_argument("--yes", action="store_true",
                     help="approve every manual step without prompting")
    run.set_defaults(fn=cmd_run)

    lab = sub.add_parser("serve-lab", help="serve the simulated lab")
    lab.add_argument("--config", required=True)
    lab.add_argument("--listen", default="127.0.0.1:0")
    lab.set_defaults(fn=cmd_serve_lab)

    gw = sub.add_parser("gateway", help="serve the HTTP gateway")
    gw.add_argument("--listen", default="127.0.0.1:8787")
    gw.add_argument("--storage")
    gw.add_argument("--console", help="static console directory to serve")
    gw.set_defaults(fn=cmd_gateway)

    kb = sub.add_parser("kb", help="knowledge-directory tools")
    kb.add_argument("--dir", default="knowledge")
    kbsub = kb.add_subparsers(dest="kb_command", required=True)
    kbsub.add_parser("list")
    add = kbsub.add_parser("add")
    add.add_argument("--id", required=True)
    add.add_argument("--title", required=True)
    add.add_argument("--kind", required=True,
                     choices=("plan", "api", "example", "tutorial"))
    add.add_argument("--file", required=True)
    add.add_argument("--refs", default="")
    search = kbsub.add_parser("search")
    search.add_argument("task")
    search.add_argument("-k", type=int, default=4)
    kb.set_defaults(fn=cmd_kb)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
