"""
Reliability acceptance sampling plans under progressive Type-I interval censoring.

Usage
-----
# Sample size and acceptance limit for a given scheme
python main.py plan --alpha 0.05 --beta 0.1 --t0 0.5 --d 1.5 \
    --model '{"eta":[1.291,1.339],"gamma":1.644,"nu":0}' --scheme '{"M":4,"h":0.2,"p":0}'

# c-optimal spacing for one or more (M, p) and the resulting plans
python main.py design --alpha 0.05 --beta 0.1 --t0 0.5 --d 1.5 --model ... --M 4,6,8 --p 0

# Budget-constrained design
python main.py design-budget --config run.json --budget 55

# Fit grouped data and decide on the lot
python main.py fit --data data/grouped_example.csv --variant dependent-equal --t0 0.15 --pi-c 0.538

Results go to stdout (or --out); logs go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, List, Optional, Tuple

from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, ValidationError

load_dotenv(override=True)

from config.settings import settings  # noqa: E402 – must be after load_dotenv
from config.validation import RiskConfig, RunConfig, format_errors, validate_config  # noqa: E402
from engine.design import design_budget, design_grid, design_unconstrained  # noqa: E402
from engine.inference import estimate_reliability, fit_mle, select_model  # noqa: E402
from engine.plans import decide, design_plan, oc_curve, risk_spec  # noqa: E402
from engine.simulate import MonteCarloEvaluator, simulate_dataset  # noqa: E402
from models.errors import ParameterDomainError, RaspError  # noqa: E402
from models.params import FitVariant, ModelParams  # noqa: E402
from models.plan import DesignGridRow, PlanResult, RiskSpec  # noqa: E402
from models.scheme import CostParams, PicScheme  # noqa: E402
from storage.artifacts import ResultStore, dump_json, observed_frame, read_observed_csv, table_csv  # noqa: E402
from utils.helpers import parse_float_list  # noqa: E402


def _configure_logging(level: Optional[str] = None) -> None:
    logger.remove()
    logger.add(
        sys.stderr,
        level=level or settings.log_level,
        colorize=False,
        format="{time:HH:mm:ss} | {level: <8} | {message}",
    )
    if settings.log_file:
        Path(settings.log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.add(settings.log_file, level=level or settings.log_level, rotation="10 MB", retention="7 days")


# ── Input helpers ─────────────────────────────────────────────────────────────


def _json_arg(raw: str) -> Any:
    """Inline JSON, or ``@path`` to read it from a file."""
    if raw.startswith("@"):
        raw = Path(raw[1:]).read_text(encoding="utf-8")
    return json.loads(raw)


def _config(args: argparse.Namespace) -> Optional[RunConfig]:
    if getattr(args, "config", None):
        return RunConfig.model_validate(_json_arg(f"@{args.config}"))
    return None


def _model(args: argparse.Namespace, config: Optional[RunConfig]) -> ModelParams:
    if getattr(args, "model", None):
        return ModelParams.model_validate(_json_arg(args.model))
    if config is not None:
        return config.model
    raise ParameterDomainError("a lifetime model is required (--model or --config)")


def _scheme(args: argparse.Namespace, config: Optional[RunConfig]) -> PicScheme:
    if getattr(args, "scheme", None):
        return PicScheme.model_validate(_json_arg(args.scheme))
    if config is not None and config.scheme is not None:
        return config.scheme
    raise ParameterDomainError("a censoring scheme is required (--scheme or --config)")


def _costs(args: argparse.Namespace, config: Optional[RunConfig]) -> CostParams:
    if args.costs:
        costs = CostParams.model_validate(_json_arg(args.costs))
    elif config is not None and config.costs is not None:
        costs = config.costs
    else:
        raise ParameterDomainError("test costs are required (--costs or --config)")
    if args.budget is not None:
        costs = CostParams.model_validate({**costs.model_dump(), "budget": args.budget})
    return costs


def _risk(args: argparse.Namespace, config: Optional[RunConfig]) -> RiskSpec:
    base = config.risk.model_dump() if config is not None and config.risk is not None else {}
    if args.d is not None:
        ratios = parse_float_list(args.d)
        base["d"] = ratios[0] if len(ratios) == 1 else ratios
    for name in ("alpha", "beta", "t0"):
        if getattr(args, name) is not None:
            base[name] = getattr(args, name)
    risk = RiskConfig.model_validate(base)
    model = _model(args, config)
    return risk_spec(risk.alpha, risk.beta, risk.t0, model.eta, risk.d, gamma=model.gamma, nu=model.nu, gammas=model.gammas)


def _plan(args: argparse.Namespace, spec: RiskSpec, config: Optional[RunConfig]) -> PlanResult:
    """The newest saved plan with ``--latest-plan``, otherwise a plan for the given scheme."""
    if args.latest_plan:
        store = ResultStore()
        plan = store.load_latest("plan", PlanResult)
        if plan is None:
            raise ParameterDomainError(f"no saved plan under {settings.reports_dir}; run `plan --save` first")
        logger.info(f"using saved plan n*={plan.n_star}, pi_c={plan.pi_c:.4f}, M={plan.scheme.M}")
        return plan
    return design_plan(spec, _scheme(args, config), round_up=args.round_up)


def _h_bounds(args: argparse.Namespace, t0: float) -> Optional[Tuple[float, float]]:
    if args.h_min is None and args.h_max is None:
        return None
    return (args.h_min or settings.h_lower, args.h_max or 2.0 * t0)


# ── Output helpers ────────────────────────────────────────────────────────────


def _emit(args: argparse.Namespace, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"Output written to {path}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _emit_result(args: argparse.Namespace, kind: str, result: Any) -> None:
    _emit(args, dump_json(result, args.precision))
    if args.save and isinstance(result, BaseModel):
        ResultStore().save(kind, result)


# ── Subcommands ───────────────────────────────────────────────────────────────


def _cmd_plan(args: argparse.Namespace) -> int:
    config = _config(args)
    spec = _risk(args, config)
    plan = design_plan(spec, _scheme(args, config), round_up=args.round_up)
    logger.info(f"plan: n*={plan.n_star}, pi_c={plan.pi_c:.4f} (n={plan.n_raw:.3f})")
    _emit_result(args, "plan", plan)
    return 0


def _cmd_design(args: argparse.Namespace) -> int:
    config = _config(args)
    spec = _risk(args, config)
    Ms = [int(m) for m in parse_float_list(args.M)]
    ps = parse_float_list(args.p)
    bounds = _h_bounds(args, spec.t0)

    if len(Ms) == 1 and len(ps) == 1 and not args.emit_table:
        design = design_unconstrained(spec, Ms[0], ps[0], bounds, round_up=args.round_up)
        logger.info(f"design: h*={design.h:.4f}, 10*phi={10 * design.phi:.4f}, n*={design.plan.n_star}, pi_c={design.plan.pi_c:.4f}")
        _emit_result(args, "design", design)
        return 0

    rows = design_grid(spec, Ms, ps, bounds, round_up=args.round_up)
    logger.info(f"design grid: {len(rows)} rows")
    if args.emit_table == "csv":
        _emit(args, table_csv(rows, columns=["p", "nu", "M", "h", "phi", "n", "pi_c"], precision=args.precision))
    else:
        _emit(args, dump_json([row.model_dump(mode="json") for row in rows], args.precision))
    return 0


def _cmd_design_budget(args: argparse.Namespace) -> int:
    config = _config(args)
    spec = _risk(args, config)
    design = design_budget(spec, _costs(args, config), args.p, M_max=args.m_max, h_bounds=_h_bounds(args, spec.t0), round_up=args.round_up)
    if args.emit_table == "csv" and args.per_m:
        _emit(args, table_csv(design.rows, precision=args.precision))
    elif args.emit_table == "csv":
        row = {
            **DesignGridRow(
                p=args.p,
                nu=spec.theta0.nu,
                M=design.M,
                h=design.h,
                phi=design.phi,
                n=design.plan.n_star,
                pi_c=design.plan.pi_c,
            ).model_dump(exclude={"at_boundary"}),
            "E_D": design.costs.e_failures,
            "E_tau": design.costs.e_duration,
            "E_I": design.costs.e_inspections,
            "TC": design.costs.total,
        }
        _emit(args, table_csv([row], precision=args.precision))
    else:
        _emit_result(args, "design_budget", design)
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    data = read_observed_csv(args.data)
    logger.info(f"[1/2] fitting {data.n} units over {data.M} intervals")
    output: dict = {}
    if args.variant == "all":
        comparison = select_model(data, restarts=args.restarts, seed=args.seed)
        fit = comparison.fits[0]
        output["comparison"] = comparison.model_dump(mode="json")
        logger.info(f"best variant by BIC: {comparison.best.value}")
    else:
        fit = fit_mle(data, FitVariant(args.variant), restarts=args.restarts, seed=args.seed)
        output["fit"] = fit.model_dump(mode="json")

    logger.info("[2/2] reliability and lot decision")
    if args.t0 is not None:
        estimate = estimate_reliability(fit, args.t0)
        output["reliability"] = estimate.model_dump(mode="json")
        logger.info(f"F({args.t0:g}) = {estimate.value:.4f} (se {estimate.se:.4f})")
        if args.pi_c is not None:
            decision = decide(estimate.value, args.pi_c)
            output["decision"] = decision.value
            logger.info(f"decision at pi_c={args.pi_c:g}: {decision.value}")
    elif args.pi_c is not None:
        raise ParameterDomainError("--pi-c needs --t0")

    _emit(args, dump_json(output, args.precision))
    if args.save:
        ResultStore().save("fit", fit)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _config(args)
    seed = settings.seed if args.seed is None else args.seed
    data = simulate_dataset(_model(args, config), _scheme(args, config), args.n, seed, replicate=args.replicate)
    logger.info(f"simulated {data.n} units: {int(data.failures.sum())} failures, {int(data.withdrawn.sum())} withdrawals")
    _emit(args, observed_frame(data).to_csv(index=False, lineterminator="\n"))
    return 0


def _cmd_mc_eval(args: argparse.Namespace) -> int:
    config = _config(args)
    spec = _risk(args, config)
    plan = _plan(args, spec, config)
    variant = FitVariant(args.variant) if args.variant else None
    evaluator = MonteCarloEvaluator(plan, spec.theta0, spec.theta1, variant=variant, threads=args.threads)
    summary = evaluator.run(args.reps, args.seed)
    if args.emit_table == "csv":
        _emit(args, table_csv([summary], precision=args.precision))
    else:
        _emit_result(args, "mc_eval", summary)
    return 0


def _cmd_oc(args: argparse.Namespace) -> int:
    config = _config(args)
    spec = _risk(args, config)
    plan = _plan(args, spec, config)
    curve = oc_curve(plan, spec.theta0, spec.theta1, grid_size=args.grid_size)
    rows = [
        {"defective_proportion": defective, "acceptance_probability": accept, "nu": spec.theta0.nu}
        for defective, accept in curve
    ]
    logger.info(f"OC curve: {len(rows)} points for plan n*={plan.n_star}, pi_c={plan.pi_c:.4f}")
    _emit(args, table_csv(rows, precision=args.precision))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    raw = Path(args.config).read_text(encoding="utf-8") if args.config else args.json
    if raw is None:
        raise ParameterDomainError("give a JSON configuration or --config")
    report = validate_config(raw)
    for error in report.errors:
        logger.error(error)
    _emit(args, dump_json(report, args.precision))
    return 0 if report.ok else 2


# ── Parser ────────────────────────────────────────────────────────────────────


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=str, default=None, help="Write results to this file instead of stdout.")
    common.add_argument("--precision", type=int, default=settings.output_precision, help="Significant digits in output.")
    common.add_argument("--threads", type=int, default=settings.threads, help="Worker processes for Monte Carlo runs.")
    common.add_argument("--save", action="store_true", help="Also store the result under the reports directory.")
    common.add_argument("--log-level", type=str, default=None, help="Override the configured log level.")
    common.add_argument("--config", type=str, default=None, help="JSON run configuration file.")

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--model", type=str, default=None, help="Lifetime model JSON (or @file).")
    inputs.add_argument("--scheme", type=str, default=None, help="PIC-I scheme JSON (or @file).")

    risk = argparse.ArgumentParser(add_help=False)
    risk.add_argument("--alpha", type=float, default=None, help="Producer's risk.")
    risk.add_argument("--beta", type=float, default=None, help="Consumer's risk.")
    risk.add_argument("--t0", type=float, default=None, help="Mission time.")
    risk.add_argument("--d", type=str, default=None, help="Discrimination ratio, or one per cause.")
    risk.add_argument("--round-up", action="store_true", help="Round the sample size up instead of down.")

    spacing = argparse.ArgumentParser(add_help=False)
    spacing.add_argument("--h-min", type=float, default=None, help="Lower end of the spacing search.")
    spacing.add_argument("--h-max", type=float, default=None, help="Upper end of the spacing search (default 2*t0).")
    spacing.add_argument("--emit-table", choices=["csv"], default=None, help="Emit a CSV table instead of JSON.")

    parser = argparse.ArgumentParser(description="Reliability acceptance sampling plans for PIC-I competing-risks tests")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common, inputs, risk], help="Sample size and acceptance limit for a scheme.")
    p.set_defaults(handler=_cmd_plan)

    p = sub.add_parser("design", parents=[common, inputs, risk, spacing], help="c-optimal spacing and plans.")
    p.add_argument("--M", type=str, default="4", help="Inspection count(s), comma separated.")
    p.add_argument("--p", type=str, default="0", help="Withdrawal proportion(s), comma separated.")
    p.set_defaults(handler=_cmd_design)

    p = sub.add_parser("design-budget", parents=[common, inputs, risk, spacing], help="Budget-constrained design.")
    p.add_argument("--costs", type=str, default=None, help="Cost JSON (or @file).")
    p.add_argument("--budget", type=float, default=None, help="Override the budget in the cost JSON.")
    p.add_argument("--p", type=float, default=0.0, help="Withdrawal proportion.")
    p.add_argument("--m-max", type=int, default=None, help="Largest inspection count considered.")
    p.add_argument("--per-m", action="store_true", help="With --emit-table, list the best design for every M.")
    p.set_defaults(handler=_cmd_design_budget)

    p = sub.add_parser("fit", parents=[common], help="Fit grouped data and decide on the lot.")
    p.add_argument("--data", type=str, required=True, help="Observed data CSV.")
    p.add_argument(
        "--variant",
        choices=[v.value for v in FitVariant] + ["all"],
        default=FitVariant.DEPENDENT_EQUAL.value,
        help="Model variant, or 'all' to rank every variant by BIC.",
    )
    p.add_argument("--t0", type=float, default=None, help="Report the reliability at this time.")
    p.add_argument("--pi-c", type=float, default=None, help="Acceptance limit for the lot decision.")
    p.add_argument("--restarts", type=int, default=None, help="Jittered optimiser restarts.")
    p.add_argument("--seed", type=int, default=None, help="Seed for the restart jitter.")
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("simulate", parents=[common, inputs], help="Simulate one PIC-I data set as CSV.")
    p.add_argument("--n", type=int, required=True, help="Units on test.")
    p.add_argument("--seed", type=int, default=None, help="Master seed.")
    p.add_argument("--replicate", type=int, default=0, help="Replicate index.")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("mc-eval", parents=[common, inputs, risk], help="Monte Carlo evaluation of a plan.")
    p.add_argument("--latest-plan", action="store_true", help="Evaluate the newest plan saved with `plan --save`.")
    p.add_argument("--reps", type=int, default=1000, help="Replicates per hypothesis.")
    p.add_argument("--seed", type=int, default=None, help="Master seed.")
    p.add_argument("--variant", choices=[v.value for v in FitVariant], default=None, help="Fitted variant.")
    p.add_argument("--emit-table", choices=["csv"], default=None, help="Emit a one-row CSV instead of JSON.")
    p.set_defaults(handler=_cmd_mc_eval)

    p = sub.add_parser("oc", parents=[common, inputs, risk], help="Operating characteristic curve as CSV.")
    p.add_argument("--latest-plan", action="store_true", help="Draw the curve of the newest saved plan.")
    p.add_argument("--grid-size", type=int, default=51, help="Points on the curve.")
    p.set_defaults(handler=_cmd_oc)

    p = sub.add_parser("validate", parents=[common], help="Check a JSON configuration.")
    p.add_argument("json", nargs="?", default=None, help="Inline JSON configuration.")
    p.set_defaults(handler=_cmd_validate)

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    _configure_logging(args.log_level)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except RaspError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return exc.exit_code
    except ValidationError as exc:
        for line in format_errors(exc):
            logger.error(f"invalid input: {line}")
        return 2
    except json.JSONDecodeError as exc:
        logger.error(f"malformed JSON: {exc}")
        return 2
    except ValueError as exc:
        logger.error(f"invalid input: {exc}")
        return 2
    except OSError as exc:
        logger.error(f"cannot read input: {exc}")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
