"""Command-line front end.

Exit codes: 0 success or passing verdict, 1 failing verdict (or invalid
scenario for ``validate``), 2 usage, syntax, schema or validation error.
Errors are written to stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from pathlib import Path

from . import decision, learning, profiles, verifier
from . import scenario_io as sio
from .model import ScenarioError, validate_scenario

FORMAT_ENV = "ETHREASON_FORMAT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit_error(kind: str, message: str, **extra) -> None:
    rec = {"error": kind, "message": message, **extra}
    sys.stderr.write(json.dumps(rec, sort_keys=True) + "\n")


class Output:
    def __init__(self, args):
        self.machine = args.format == "machine"
        self.path = getattr(args, "output", None)

    def write(self, machine_text: str, human_lines) -> None:
        text = machine_text if self.machine else "\n".join(human_lines) + "\n"
        if self.path:
            Path(self.path).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)


def _fmt(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _load(path, weights=None):
    model = sio.load_scenario(path)
    if weights:
        model = sio.apply_weights_file(model, weights)
    return model


# -- subcommands -------------------------------------------------------------

def cmd_validate(args, out: Output) -> int:
    model = sio.load_scenario(args.file, validate=False)
    report = validate_scenario(model)
    lines = [f"{args.file}: {'valid' if report.ok else f'{len(report)} violation(s)'}"]
    lines += [f"  [{v.code}] {v.message}" for v in report.violations]
    out.write(sio.serialize_report(report), lines)
    return 0 if report.ok else 1


def _decision_lines(model, rep) -> list[str]:
    lines = [f"scenario: {model.name}", f"chosen_action: {rep.chosen_action}"]
    if rep.tie:
        lines.append(f"tie among {', '.join(rep.tied_actions)} (broken by prescript priority, then id)")
    lines.append("expected utilities:")
    for a in model.action_ids:
        lines.append(f"  {a}: {_fmt(rep.expected_utilities[a])}")
    return lines


def cmd_decide(args, out: Output) -> int:
    model = _load(args.file, args.weights)
    rep = decision.decide(model)
    lines = _decision_lines(model, rep)
    lines.append("per-prescript contributions (alpha_j * U_j):")
    for a in model.action_ids:
        parts = ", ".join(f"{e}={_fmt(rep.objective_breakdown[(a, e)])}" for e in model.prescript_ids)
        lines.append(f"  {a}: {parts}")
    out.write(sio.serialize_report(rep), lines)
    return 0


def cmd_explain(args, out: Output) -> int:
    model = _load(args.file, args.weights)
    rep = decision.decide(model)
    lines = _decision_lines(model, rep)
    lines.append("")
    for e in model.prescripts:
        lines.append(f"prescript {e.id} (rank {e.priority_rank}, alpha {_fmt(model.alpha(e.id))}): {e.description}")
        ranked = sorted(model.action_ids, key=lambda a: (-rep.objective_breakdown[(a, e.id)], a))
        lines.append("  favours " + " > ".join(f"{a} ({_fmt(rep.objective_breakdown[(a, e.id)])})" for a in ranked))
    runner_up = [a for a in model.action_ids if a != rep.chosen_action]
    if runner_up:
        second = max(runner_up, key=lambda a: (rep.expected_utilities[a], a))
        margin = rep.expected_utilities[rep.chosen_action] - rep.expected_utilities[second]
        lines.append("")
        lines.append(f"{rep.chosen_action} beats {second} by {_fmt(margin)}:")
        for e in model.prescript_ids:
            diff = rep.objective_breakdown[(rep.chosen_action, e)] - rep.objective_breakdown[(second, e)]
            lines.append(f"  {e}: {diff:+.6g}")
    out.write(sio.serialize_report(rep), lines)
    return 0


def cmd_sample(args, out: Output) -> int:
    model = _load(args.file, args.weights)
    dist = decision.action_distribution(model, args.temp)
    draws = [decision.sample_action(model, args.temp, args.seed + i) for i in range(args.n)]
    counts = Counter(draws)
    freqs = {a: counts.get(a, 0) / args.n for a in model.action_ids}
    body = {"temperature": float(args.temp), "seed": int(args.seed), "action_distribution": dist,
            "samples": draws, "frequencies": freqs}
    lines = [f"temperature {_fmt(args.temp)}, seed {args.seed}, {args.n} draw(s)"]
    for a in model.action_ids:
        lines.append(f"  {a}: p={_fmt(dist[a])} observed={_fmt(freqs[a])}")
    if args.n <= 20:
        lines.append("draws: " + " ".join(draws))
    out.write(sio.tagged("sample_report", body), lines)
    return 0


def _verifier_lines(name: str, rep) -> list[str]:
    lines = [f"{name}: {rep.verdict.upper()} ({rep.trials} trial(s))"]
    for k, v in rep.measured.items():
        lines.append(f"  {k}: {_fmt(v)}")
    if rep.failures:
        shown = ", ".join(str(f) for f in list(rep.failures)[:10])
        lines.append(f"  counterexamples: {shown}{' ...' if len(rep.failures) > 10 else ''}")
    return lines


def _verdict_code(rep) -> int:
    return 0 if rep.passed else 1


def cmd_perturb(args, out: Output) -> int:
    model = _load(args.file, args.weights)
    spec = verifier.PerturbationSpec(args.mode, args.delta, args.samples, args.seed)
    rep = verifier.check_robustness(model, spec, args.kmax, temperature=args.temp)
    out.write(sio.serialize_report(rep), _verifier_lines("robustness", rep))
    return _verdict_code(rep)


def cmd_consistency(args, out: Output) -> int:
    model = _load(args.file, args.weights)
    spec = verifier.PerturbationSpec(args.mode, args.delta, args.samples, args.seed)
    rep = verifier.check_consistency(model, spec, args.lmax)
    out.write(sio.serialize_report(rep), _verifier_lines("consistency", rep))
    return _verdict_code(rep)


def cmd_optimality(args, out: Output) -> int:
    model = _load(args.file, args.weights)
    rep = verifier.check_optimality(model)
    lines = _verifier_lines("optimality", rep)
    lines.append(f"  chosen: {rep.details['chosen_action']}; oracle argmax: {', '.join(rep.details['oracle_argmax'])}")
    out.write(sio.serialize_report(rep), lines)
    return _verdict_code(rep)


def cmd_align(args, out: Output) -> int:
    paths = list(args.files) + list(args.corpus or [])
    if not paths:
        raise UsageError("align needs at least one corpus file")
    records = []
    for p in paths:
        records.extend(sio.load_corpus(p))
    rep = verifier.check_alignment(records, args.theta)
    out.write(sio.serialize_report(rep), _verifier_lines("alignment", rep))
    return _verdict_code(rep)


def cmd_learn(args, out: Output) -> int:
    model = _load(args.file, args.weights)
    stride = args.stride or max(1, args.episodes // 200)
    rep = learning.run_learning(
        model, args.episodes, seed=args.seed, eps_conv=args.eps_conv,
        window=min(args.window, args.episodes), tau0=args.tau0, tau_min=args.tau_min,
        noise=args.noise, record_episodes=bool(args.trajectory), trajectory_every=stride,
    )
    if args.trajectory:
        Path(args.trajectory).write_text(learning.trajectory_csv(rep), encoding="utf-8")
    lines = [
        f"converged: {rep.converged}" + (f" at step {rep.convergence_step}" if rep.converged else ""),
        f"final P(best|C): {_fmt(rep.final_probability)} (eps_conv {_fmt(rep.eps_conv)}, window {rep.stability_window})",
        "best action per dictum: " + ", ".join(f"{c}->{a}" for c, a in rep.best_actions.items()),
    ]
    out.write(sio.serialize_report(rep), lines)
    return 0 if rep.converged else 1


def cmd_profile_build(args, out: Output) -> int:
    model = _load(args.file, args.weights)
    m = profiles.build_matrix(model)
    if args.normalize:
        m = profiles.normalize_matrix(m)
    return _write_profile(args, out, m, args.id or model.name)


def cmd_profile_normalize(args, out: Output) -> int:
    pid, m = sio.load_profile(args.file)
    return _write_profile(args, out, profiles.normalize_matrix(m), args.id or pid)


def _write_profile(args, out: Output, m, pid: str) -> int:
    lines = [f"profile {pid} ({'normalized' if m.normalized else 'raw'})",
             "rows: " + " ".join(m.prescript_ids), "cols: " + " ".join(m.dictum_ids)]
    for e, row in zip(m.prescript_ids, m.entries):
        lines.append(f"  {e}: " + " ".join(_fmt(float(x)) for x in row))
    out.write(sio.serialize_profile(m, pid), lines)
    return 0


def cmd_profile_cluster(args, out: Output) -> int:
    items = [sio.load_profile(p) for p in args.files]
    coll = profiles.cluster_collection(items, args.k, args.seed)
    index = sio.index_to_dict(coll, args.k, args.seed)
    if args.out_dir:
        sio.save_collection(coll, args.out_dir, args.k, args.seed)
    lines = [f"{len(items)} profile(s) in {args.k} cluster(s), total within-cluster distance {_fmt(coll.cost)}"]
    for cid, members in coll.clusters.items():
        lines.append(f"  {cid} (medoid {coll.medoids[cid]}): {' '.join(members)}")
    out.write(sio.dumps(index), lines)
    return 0


def cmd_profile_retrieve(args, out: Output) -> int:
    coll = sio.load_collection(args.collection)
    _, query = sio.load_profile(args.query)
    if not query.normalized:
        query = profiles.normalize_matrix(query)
    pid, cid, dist = profiles.retrieve_profile(coll, query)
    body = {"profile_id": pid, "cluster_id": cid, "distance": dist}
    out.write(sio.tagged("retrieval_report", body), [f"nearest profile {pid} in {cid}, distance {_fmt(dist)}"])
    return 0


def cmd_profile_apply(args, out: Output) -> int:
    model = _load(args.file)
    _, m = sio.load_profile(args.profile)
    applied = profiles.apply_profile(model, m)
    rep = decision.decide(applied)
    lines = [f"baseline weights of {model.name} replaced by 1 + profile entries"] + _decision_lines(applied, rep)
    out.write(sio.serialize_scenario(applied), lines)
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("human", "machine"),
                        default=os.environ.get(FORMAT_ENV, "human"),
                        help=f"output format (default from ${FORMAT_ENV}, else human)")
    common.add_argument("-o", "--output", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")

    scen = _Parser(add_help=False)
    scen.add_argument("file", help="scenario file")
    scen.add_argument("--weights", help="weight configuration file to apply")

    pert = _Parser(add_help=False)
    pert.add_argument("--delta", type=float, required=True, help="perturbation budget")
    pert.add_argument("--samples", type=int, default=1000)
    pert.add_argument("--mode", choices=verifier.MODES, default="context")

    p = _Parser(prog="ethreason", description="Probabilistic ethical decision engine.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[common], help="check a scenario's invariants")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("decide", parents=[common, scen], help="choose the expected-utility maximizing action")
    s.set_defaults(func=cmd_decide)

    s = sub.add_parser("explain", parents=[common, scen], help="explain a decision per prescript")
    s.set_defaults(func=cmd_explain)

    s = sub.add_parser("sample", parents=[common, scen], help="draw actions from the softmax action distribution")
    s.add_argument("--temp", type=float, default=1.0)
    s.add_argument("--n", type=int, default=1)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("perturb", parents=[common, scen, pert], help="robustness of decisions under perturbation")
    s.add_argument("--kmax", type=float, default=None, help="pass threshold for K-hat (omit to measure only)")
    s.add_argument("--temp", type=float, default=1.0)
    s.set_defaults(func=cmd_perturb)

    s = sub.add_parser("consistency", parents=[common, scen, pert], help="Lipschitz consistency of prescript priorities")
    s.add_argument("--lmax", type=float, default=None, help="pass threshold for L-hat (omit to measure only)")
    s.set_defaults(func=cmd_consistency)

    s = sub.add_parser("optimality", parents=[common, scen], help="exhaustive optimality oracle")
    s.set_defaults(func=cmd_optimality)

    s = sub.add_parser("align", parents=[common], help="agreement with a reference decision corpus")
    s.add_argument("files", nargs="*", help="corpus files")
    s.add_argument("--corpus", action="append", help="corpus file (repeatable)")
    s.add_argument("--theta", type=float, required=True)
    s.set_defaults(func=cmd_align)

    s = sub.add_parser("learn", parents=[common, scen], help="run the policy learner and test convergence")
    s.add_argument("--episodes", type=int, required=True)
    s.add_argument("--eps-conv", type=float, default=0.05)
    s.add_argument("--window", type=int, default=500)
    s.add_argument("--tau0", type=float, default=1.0)
    s.add_argument("--tau-min", type=float, default=0.01)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--stride", type=int, default=0, help="trajectory sampling stride (default episodes/200)")
    s.add_argument("--trajectory", help="write per-episode CSV rows here")
    s.set_defaults(func=cmd_learn)

    prof = sub.add_parser("profile", help="ethical profile matrices")
    psub = prof.add_subparsers(dest="profile_command", required=True, parser_class=_Parser)
    s = psub.add_parser("build", parents=[common, scen], help="profile matrix of a scenario")
    s.add_argument("--id")
    s.add_argument("--normalize", action="store_true")
    s.set_defaults(func=cmd_profile_build)
    s = psub.add_parser("normalize", parents=[common], help="min-max normalize a profile")
    s.add_argument("file")
    s.add_argument("--id")
    s.set_defaults(func=cmd_profile_normalize)
    s = psub.add_parser("cluster", parents=[common], help="k-medoids cluster normalized profiles")
    s.add_argument("files", nargs="+")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out-dir", help="persist the collection (profiles + index.json) here")
    s.set_defaults(func=cmd_profile_cluster)
    s = psub.add_parser("retrieve", parents=[common], help="nearest stored profile to a query")
    s.add_argument("collection", help="collection directory or its index.json")
    s.add_argument("query", help="query profile file")
    s.set_defaults(func=cmd_profile_retrieve)
    s = psub.add_parser("apply", parents=[common], help="use a profile as baseline weights for a scenario")
    s.add_argument("file")
    s.add_argument("profile")
    s.set_defaults(func=cmd_profile_apply)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _emit_error("usage", str(exc))
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args, Output(args))
    except UsageError as exc:
        _emit_error("usage", str(exc))
    except sio.FormatError as exc:
        _emit_error("parse", str(exc), source=exc.source, where=exc.where)
    except ScenarioError as exc:
        report = getattr(exc, "report", None)
        extra = {"violations": [v.to_dict() for v in report.violations]} if report is not None else {}
        _emit_error("invalid", str(exc), **extra)
    except OSError as exc:
        _emit_error("io", str(exc))
    except ValueError as exc:
        _emit_error("value", str(exc))
    return 2


def main() -> None:
    sys.exit(run_cli())
