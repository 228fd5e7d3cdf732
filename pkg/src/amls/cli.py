"""Command-line front end: ``amls compute|table|curve|fvalue|simulate``.

Exit codes: 0 on success, 2 for invalid input, 3 when a solver fails to converge.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from decimal import ROUND_HALF_EVEN, Decimal
from functools import partial
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import click

from .core import ConvergenceError, DomainError, amlsbound, brute_bound, esaamlsbound
from .discrete import EXACT_F_MAX_N, ModeError, TailMode, base_estimate, f_value, floor_snap
from .search import (
    OracleContractError,
    PlantedInstance,
    amls_run,
    det_amls_run,
    make_planted_oracle,
    make_rng,
)
from .specs import OracleSpec, SpecError, SpecList, load_spec_file

EXIT_INVALID = 2
EXIT_NO_CONVERGENCE = 3
TABLE_COLUMNS = ("d", "kappa_star", "brute", "esa", "active_oracle")
CURVE_SERIES = ("brute", "esa")

T = TypeVar("T")
R = TypeVar("R")


def fmt(value: Optional[float], decimals: int) -> str:
    """Fixed-point text with round-half-even on the shortest decimal form of ``value``."""
    if value is None:
        return ""
    quantum = Decimal(1).scaleb(-decimals)
    return str(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_EVEN))


def decimals_for(eps: float) -> int:
    return max(0, math.ceil(-math.log10(eps) - 1e-12))


def parse_betas(text: str) -> list[float]:
    """``start:stop:step`` (stop included) or a comma-separated list of values, each >= 1."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, step = (float(p) for p in parts)
            if not step > 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + i * step, 12) for i in range(count)]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise click.BadParameter(f"malformed beta range {text!r}", param_hint="--betas") from None
    if not values or any(not (math.isfinite(b) and b >= 1.0) for b in values):
        raise click.BadParameter(f"betas must be non-empty and each >= 1, got {text!r}", param_hint="--betas")
    return values


def parse_names(text: str, allowed: Sequence[str], hint: str) -> list[str]:
    names = [n.strip() for n in text.split(",") if n.strip()]
    bad = [n for n in names if n not in allowed]
    if bad or not names:
        raise click.BadParameter(f"unknown entries {bad}; choose from {', '.join(allowed)}", param_hint=hint)
    return names


def worker_count() -> int:
    raw = os.environ.get("AMLS_THREADS", "0").strip() or "0"
    try:
        count = int(raw)
    except ValueError:
        raise click.UsageError(f"AMLS_THREADS must be an integer, got {raw!r}") from None
    if count < 0:
        raise click.UsageError(f"AMLS_THREADS must be >= 0, got {count}")
    return count or (os.cpu_count() or 1)


def ordered_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Map over ``items`` with up to ``AMLS_THREADS`` workers, keeping request order."""
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def load_specs(path: str) -> SpecList:
    try:
        return load_spec_file(path)
    except OSError as exc:
        raise click.BadParameter(str(exc), param_hint="--spec") from None
    except SpecError as exc:
        raise click.BadParameter(f"{path}: {exc}", param_hint="--spec") from None


def format_spec(spec: OracleSpec) -> str:
    return f"{spec.alpha:g}:{spec.c:g}"


class AmlsGroup(click.Group):
    """Maps library errors onto the documented exit codes."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except ConvergenceError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_NO_CONVERGENCE)
        except (DomainError, SpecError, ModeError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_INVALID)


@click.group(cls=AmlsGroup)
def main() -> None:
    """Running-time bases and simulations for approximate monotone local search."""


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------


@main.command()
@click.option("--alpha", type=float, help="Approximation ratio of a single oracle.")
@click.option("--c", "c", type=float, help="Cost base of a single oracle.")
@click.option("--spec", "spec_path", type=str, help="Spec file with one 'alpha,c' pair per line.")
@click.option("--beta", type=float, required=True, help="Target approximation ratio.")
@click.option("--eps", type=float, default=1e-6, show_default=True, help="Additive precision on d.")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON object instead of 'd=<value>'.")
def compute(alpha, c, spec_path, beta, eps, as_json) -> None:
    """Compute the optimal base d for one oracle or a spec file."""
    if spec_path is not None:
        if alpha is not None or c is not None:
            raise click.UsageError("use either --spec or --alpha/--c, not both")
        specs = load_specs(spec_path)
    else:
        if alpha is None or c is None:
            raise click.UsageError("need --alpha and --c, or --spec")
        specs = SpecList([(alpha, c)])
    if not (math.isfinite(eps) and eps > 0):
        raise click.BadParameter("eps must be positive", param_hint="--eps")
    result = amlsbound(specs, beta, eps)
    if as_json:
        payload = {
            "d": result.d,
            "ln_d": result.ln_d,
            "kappa_star": result.kappa_star,
            "active": [[s.alpha, s.c] for s in result.active_specs],
            "eps": result.eps,
            "iterations": result.iterations,
        }
        click.echo(json.dumps(payload))
    else:
        click.echo(f"d={fmt(result.d, decimals_for(eps))}")


# ---------------------------------------------------------------------------
# table / curve
# ---------------------------------------------------------------------------


def esa_for(specs: SpecList, beta: float) -> Optional[float]:
    """Best base of the earlier algorithm over the specs usable as beta-extension oracles."""
    usable = [s.c for s in specs if s.alpha <= beta and s.c > 1.0]
    if beta <= 1.0 or not usable:
        return None
    return min(esaamlsbound(beta, c) for c in usable)


def table_row(beta: float, specs: SpecList, eps: float, columns: tuple[str, ...]) -> list[str]:
    result = amlsbound(specs, beta, eps) if {"d", "kappa_star", "active_oracle"} & set(columns) else None
    row = [fmt(beta, 6)]
    for col in columns:
        if col == "d":
            row.append(fmt(result.d, 6))
        elif col == "kappa_star":
            row.append(fmt(result.kappa_star, 6))
        elif col == "brute":
            row.append(fmt(brute_bound(beta), 6))
        elif col == "esa":
            row.append(fmt(esa_for(specs, beta), 6))
        elif col == "active_oracle":
            row.append("|".join(format_spec(s) for s in result.active_specs))
    return row


def emit_csv(header: Iterable[str], rows: Iterable[Iterable[str]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    click.echo(buf.getvalue(), nl=False)


@main.command()
@click.option("--spec", "spec_path", required=True, help="Spec file.")
@click.option("--betas", required=True, help="start:stop:step (inclusive) or a comma list.")
@click.option("--eps", type=float, default=1e-6, show_default=True)
@click.option("--columns", default="d", show_default=True, help=f"Comma list from {','.join(TABLE_COLUMNS)}.")
def table(spec_path, betas, eps, columns) -> None:
    """CSV table of bases, one row per beta."""
    specs = load_specs(spec_path)
    beta_values = parse_betas(betas)
    cols = tuple(parse_names(columns, TABLE_COLUMNS, "--columns"))
    rows = ordered_map(partial(table_row, specs=specs, eps=eps, columns=cols), beta_values)
    emit_csv(["beta", *cols], rows)


@main.command()
@click.option("--spec", "spec_path", required=True, help="Spec file.")
@click.option("--betas", required=True, help="start:stop:step (inclusive) or a comma list.")
@click.option("--eps", type=float, default=1e-6, show_default=True)
@click.option("--include", default="", help="Extra series: brute,esa.")
def curve(spec_path, betas, eps, include) -> None:
    """CSV polyline data ``beta,d[,brute][,esa]`` for plotting."""
    specs = load_specs(spec_path)
    beta_values = parse_betas(betas)
    extra = tuple(parse_names(include, CURVE_SERIES, "--include")) if include.strip() else ()
    rows = ordered_map(partial(table_row, specs=specs, eps=eps, columns=("d", *extra)), beta_values)
    emit_csv(["beta", "d", *extra], rows)


# ---------------------------------------------------------------------------
# fvalue
# ---------------------------------------------------------------------------


@main.command()
@click.option("--spec", "spec_path", required=True, help="Spec file.")
@click.option("--beta", type=float, required=True)
@click.option("--n", "n", type=int, required=True, help="Universe size.")
@click.option("--exact", is_flag=True, help=f"Exact rational tails (n <= {EXACT_F_MAX_N}).")
@click.option("--trace", is_flag=True, help="Also print the cheapest (spec, t) for every k.")
def fvalue(spec_path, beta, n, exact, trace) -> None:
    """Discrete optimal cost f(n) and its n-th root."""
    specs = load_specs(spec_path)
    if exact and n > EXACT_F_MAX_N:
        raise click.BadParameter(f"--exact needs n <= {EXACT_F_MAX_N}", param_hint="--n")
    feval = f_value(specs, beta, n, mode=TailMode.EXACT if exact else TailMode.LOG)
    click.echo(f"ln_f={fmt(feval.log_value, 6)} base={fmt(base_estimate(feval), 6)} k*={feval.argmax_k}")
    if trace:
        for rec in feval.per_k:
            click.echo(
                f"k={rec.k} alpha={rec.spec.alpha:g} c={rec.spec.c:g} t={rec.t} log_term={fmt(rec.log_term, 6)}"
            )


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def run_trial(
    index: int, n: int, k: int, beta: float, specs: SpecList, seed: int, deterministic: bool, adversarial: bool
):
    rng = make_rng(seed + index)
    instance = PlantedInstance.random(n, k, beta, rng)
    handles = [make_planted_oracle(instance, s, adversarial=adversarial) for s in specs]
    if deterministic:
        result = det_amls_run(instance, specs, beta, handles)
    else:
        result = amls_run(instance, specs, beta, handles, rng)
    success = instance.contains(result.solution) and result.size <= floor_snap(beta * k)
    return success, result.size, result.ledger


@main.command()
@click.option("--n", "n", type=int, required=True, help="Universe size.")
@click.option("--k", "k", type=int, required=True, help="Size of the planted optimum.")
@click.option("--beta", type=float, required=True)
@click.option("--spec", "spec_path", required=True, help="Spec file.")
@click.option("--trials", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Trial i uses seed + i.")
@click.option("--deterministic", is_flag=True, help="Use the derandomized search.")
@click.option("--adversarial", is_flag=True, help="Use the adversarial planted oracle.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), help="Write the query log CSV here.")
def simulate(n, k, beta, spec_path, trials, seed, deterministic, adversarial, log_path) -> None:
    """Run the search on planted instances and report the success frequency and cost."""
    specs = load_specs(spec_path)
    if n < 1 or k < 0 or trials < 1:
        raise click.BadParameter("need n >= 1, k >= 0 and trials >= 1")
    if not (math.isfinite(beta) and beta >= 1.0):
        raise click.BadParameter("beta must be >= 1", param_hint="--beta")
    if k > n / beta:
        raise click.BadParameter(f"k={k} exceeds n/beta={n / beta:g}", param_hint="--k")
    job = partial(
        run_trial, n=n, k=k, beta=beta, specs=specs, seed=seed,
        deterministic=deterministic, adversarial=adversarial,
    )
    try:
        outcomes = ordered_map(job, list(range(trials)))
    except OracleContractError as exc:
        raise DomainError(str(exc)) from None
    successes = sum(1 for ok, _, _ in outcomes if ok)
    costs = [ledger.oracle_cost for _, _, ledger in outcomes]
    sizes = [size for _, size, _ in outcomes]
    click.echo(f"success={fmt(successes / trials, 6)} trials={trials}")
    click.echo(f"mean_cost={fmt(sum(costs) / trials, 6)} max_cost={fmt(max(costs), 6)}")
    click.echo(f"min_size={min(sizes)} max_size={max(sizes)}")
    if log_path:
        with open(log_path, "w", encoding="utf-8", newline="") as fh:
            for i, (_, _, ledger) in enumerate(outcomes):
                buf = io.StringIO()
                ledger.write_log(buf, extra={"trial": i})
                text = buf.getvalue()
                fh.write(text if i == 0 else text.split("\n", 1)[1])


if __name__ == "__main__":
    sys.exit(main())
