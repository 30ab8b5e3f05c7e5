"""CVaR-optimal day-ahead offer curves for a price-taking wind generator."""

from ._core import (
    ClearingOutcome,
    GaussianSpec,
    MissingDataError,
    OfferCurve,
    Scenario,
    ScenarioSet,
    Segment,
    SolveOptions,
    SolveReport,
    SolverRefusal,
    ValidationError,
    active_samples,
    clear,
    cvar,
    evaluate,
    export_miqp,
    ideal_profit,
    load_scenarios_csv,
    percentile_strategy,
    postprocess,
    run_hour,
    sample_gaussian,
    settle_realtime,
    solve_bruteforce,
    solve_exact,
    value_at_risk,
)

__all__ = [name for name in dir() if not name.startswith("_")]
