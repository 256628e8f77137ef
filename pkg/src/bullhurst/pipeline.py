"""End-to-end pipeline: ingestion through tables, figures and manifest.

Stages run in a fixed order (ingest, garch, hurst, regime, predictors,
insample, oos, allocate, report); each writes its artifacts into the
output directory as it completes.  A failure is re-raised as StageError
tagged with the stage name.  All randomness flows from the single
configured seed: consumer k of stream `purpose` draws its seed from
numpy's SeedSequence(seed, spawn_key=(purpose, k)); purpose 1 is the
in-sample wild bootstrap, indexed by row order of the report.

Two runs with the same config and inputs produce byte-identical output
trees (hashes of everything written land in manifest.json).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import __version__, _kernels
from . import allocate as alloc_mod
from . import evaluate, garchfilter, hurst, marketdata, predictors, regime, regress
from .config import PipelineConfig
from .errors import BullhurstError, StageError, ValidationError

STAGES = ("ingest", "garch", "hurst", "regime", "predictors",
          "insample", "oos", "allocate", "report")

PC_GROUPS = ("PC-ECON", "PC-TECH", "PC-ALL")
FLOAT_FORMAT = "%.12g"

_BOOTSTRAP_STREAM = 1


@dataclass
class PipelineState:
    """Artifacts accumulated while stages run."""

    cfg: PipelineConfig
    daily: marketdata.DailySeries | None = None
    macro: marketdata.MacroPanel | None = None
    recessions: marketdata.RecessionCalendar | None = None
    returns: marketdata.ReturnSeries | None = None
    premium: marketdata.PremiumSeries | None = None
    garch_params: garchfilter.GarchParams | None = None
    filtered: marketdata.ReturnSeries | None = None
    hurst_series: hurst.HurstSeries | None = None
    bullish: regime.BullishSeries | None = None
    insample_shocks: tuple | None = None
    oos_shocks: tuple | None = None
    panel: predictors.PredictorPanel | None = None
    targets: pd.PeriodIndex | None = None
    y: np.ndarray | None = None
    X: pd.DataFrame | None = None
    masks_in: regime.RegimeMasks | None = None
    masks_oos: regime.RegimeMasks | None = None
    insample_table: pd.DataFrame | None = None
    forecasts: dict = field(default_factory=dict)
    oos_start_pos: int | None = None
    oos_table: pd.DataFrame | None = None
    allocation_table: pd.DataFrame | None = None
    holding_table: pd.DataFrame | None = None
    written: dict = field(default_factory=dict)


def bootstrap_seed(master: int, index: int) -> int:
    """Deterministic child seed for bootstrap consumer `index`."""
    ss = np.random.SeedSequence(master, spawn_key=(_BOOTSTRAP_STREAM, index))
    return int(ss.generate_state(1)[0])


def significance_stars(p) -> str:
    """Stars at the 10/5/1 percent one-sided levels."""
    if not np.isfinite(p):
        return ""
    if p <= 0.01:
        return "***"
    if p <= 0.05:
        return "**"
    if p <= 0.10:
        return "*"
    return ""


def _write_csv(state, name, frame, index=False):
    path = state.cfg.output_dir / name
    frame.to_csv(path, index=index, float_format=FLOAT_FORMAT)
    state.written[name] = path
    return path


def _stage_ingest(state: PipelineState):
    cfg = state.cfg
    state.daily = marketdata.load_daily_prices(cfg.daily_path)
    state.macro = marketdata.load_macro_panel(cfg.macro_path)
    state.recessions = marketdata.load_recessions(cfg.recessions_path)
    state.returns = marketdata.daily_log_returns(state.daily)
    state.premium = marketdata.monthly_equity_premium(state.macro, dividends=cfg.dividends)


def _stage_garch(state: PipelineState):
    state.garch_params = garchfilter.fit_garch11(state.returns)
    path = state.cfg.output_dir / "garch_params.json"
    path.write_text(json.dumps(state.garch_params.as_dict(), sort_keys=True,
                               indent=2) + "\n")
    state.written["garch_params.json"] = path


def _stage_hurst(state: PipelineState):
    state.filtered = garchfilter.filter_returns(state.returns, state.garch_params)
    state.hurst_series = hurst.local_hurst(state.filtered, state.cfg.fdmaa)
    hs = state.hurst_series
    frame = pd.DataFrame({
        "date": hs.dates.strftime("%Y-%m-%d"),
        "h": hs.h,
        "r2": hs.r2,
    })
    _write_csv(state, "hurst.csv", frame)


def _stage_regime(state: PipelineState):
    cfg = state.cfg
    state.bullish = regime.bullish_series(state.returns, state.hurst_series,
                                          h_threshold=cfg.h_threshold)
    bu = state.bullish.bu_series()
    state.insample_shocks = regime.detect_shocks(
        bu, mode=cfg.regime_mode, threshold=cfg.regime_threshold,
        quantile=cfg.regime_quantile)
    # out-of-sample masks always use the fixed threshold: it is causal
    state.oos_shocks = regime.detect_shocks(bu, mode="fixed",
                                            threshold=cfg.regime_threshold)
    peaks, troughs = state.insample_shocks
    frame = pd.DataFrame({
        "month": state.bullish.months.astype(str),
        "b": state.bullish.b,
        "bu": state.bullish.bu,
        "peak": state.bullish.months.isin(peaks).astype(int),
        "trough": state.bullish.months.isin(troughs).astype(int),
    })
    _write_csv(state, "regime.csv", frame)


def _stage_predictors(state: PipelineState):
    cfg = state.cfg
    state.panel = predictors.build_predictor_panel(
        state.macro, state.premium, state.daily, literal_ma=cfg.literal_ma)
    _align_analysis(state)
    frame = state.panel.all.copy()
    frame.insert(0, "month", state.panel.months.astype(str))
    _write_csv(state, "predictors.csv", frame)


def _align_analysis(state: PipelineState):
    """Pair predictor months t with premium target months t+1."""
    cfg = state.cfg
    prem = state.premium.as_series()
    targets = (state.panel.months + 1).intersection(prem.index)
    if cfg.sample_start is not None:
        targets = targets[targets >= cfg.sample_start]
    if cfg.sample_end is not None:
        targets = targets[targets <= cfg.sample_end]
    if len(targets) < 24:
        raise ValidationError("fewer than 24 aligned analysis months")
    state.targets = targets
    state.y = prem.loc[targets].to_numpy()
    state.X = state.panel.all.loc[targets - 1]
    peaks_in, troughs_in = state.insample_shocks
    state.masks_in = regime.insample_masks(
        targets, peaks_in, troughs_in, before=cfg.regime_before,
        after=cfg.regime_after, calendar=state.recessions)
    peaks_oos, troughs_oos = state.oos_shocks
    state.masks_oos = regime.oos_masks(
        targets, peaks_oos, troughs_oos, horizon=cfg.oos_horizon,
        calendar=state.recessions)


def _mask_columns(masks: regime.RegimeMasks):
    return (("exp", masks.expansion), ("rec", masks.recession),
            ("stable_plus", masks.stable_plus), ("bu_plus", masks.peak),
            ("stable_minus", masks.stable_minus), ("bu_minus", masks.trough))


def _predictor_columns(state):
    """(name, group, values-at-origin) for the 28 individual predictors."""
    for name in predictors.MACRO_ORDER:
        yield name, "macro", state.X[name].to_numpy()
    for name in predictors.TECH_ORDER:
        yield name, "tech", state.X[name].to_numpy()


def _group_matrix(state, group):
    if group == "PC-ECON":
        return state.X[list(predictors.MACRO_ORDER)].to_numpy()
    if group == "PC-TECH":
        return state.X[list(predictors.TECH_ORDER)].to_numpy()
    return state.X.to_numpy()


def _stage_insample(state: PipelineState):
    cfg = state.cfg
    y = state.y
    rows = []
    row_index = 0

    def evaluate_fitted(fitted):
        vals = {"r2": 100.0 * evaluate.conditional_r2(y, fitted)}
        for label, mask in _mask_columns(state.masks_in):
            vals[f"r2_{label}"] = 100.0 * evaluate.conditional_r2(y, fitted, mask)
        return vals

    for name, group, x in _predictor_columns(state):
        fit = regress.ols_fit(y, x)
        tstat = fit.hac_tstats[1] if fit.hac_tstats is not None else np.nan
        pval = regress.wild_bootstrap_pvalue(
            y, x, tstat, B=cfg.bootstrap_replications,
            seed=bootstrap_seed(cfg.seed, row_index))
        rows.append({"predictor": name, "group": group,
                     "slope": fit.coef[1], "hac_t": tstat, "boot_p": pval,
                     "stars": significance_stars(pval),
                     **evaluate_fitted(fit.fitted)})
        row_index += 1
    for group in PC_GROUPS:
        X = _group_matrix(state, group)
        fit, pca = regress.pc_regression(y, X, k_max=cfg.k_max)
        tstat = fit.hac_tstats[1] if fit.hac_tstats is not None else np.nan
        if pca.k == 1:
            scores = pca.transform(X)[:, 0]
            pval = regress.wild_bootstrap_pvalue(
                y, scores, tstat, B=cfg.bootstrap_replications,
                seed=bootstrap_seed(cfg.seed, row_index))
        else:
            pval = np.nan
        rows.append({"predictor": group, "group": "pc", "slope": fit.coef[1],
                     "hac_t": tstat, "boot_p": pval,
                     "stars": significance_stars(pval), "k": pca.k,
                     **evaluate_fitted(fit.fitted)})
        row_index += 1
    state.insample_table = pd.DataFrame(rows)
    _write_csv(state, "insample.csv", state.insample_table)


def _stage_oos(state: PipelineState):
    cfg = state.cfg
    positions = state.targets.get_indexer([cfg.oos_start])
    if positions[0] < 0:
        raise ValidationError(f"oos.start {cfg.oos_start} is outside the sample")
    start = int(positions[0])
    state.oos_start_pos = start
    y = state.y
    rows = []

    def report_row(name, group, fs):
        sliced = {label: mask[start:] for label, mask in _mask_columns(state.masks_oos)}
        stat, pval = evaluate.clark_west(fs)
        row = {"predictor": name, "group": group, "cw_stat": stat, "cw_p": pval,
               "stars": significance_stars(pval),
               "r2_os": 100.0 * evaluate.r2_os(fs), "n_fallback": fs.n_fallback}
        for label, mask in sliced.items():
            row[f"r2_os_{label}"] = 100.0 * evaluate.r2_os(fs, mask)
        return row

    for name, group, x in _predictor_columns(state):
        fs = evaluate.recursive_forecast(y, x, start, months=state.targets,
                                         min_train=cfg.min_train, model_id=name)
        state.forecasts[name] = fs
        rows.append(report_row(name, group, fs))
    for group in PC_GROUPS:
        X = _group_matrix(state, group)
        fs = evaluate.recursive_pc_forecast(y, X, start, months=state.targets,
                                            k_max=cfg.k_max,
                                            min_train=cfg.min_train,
                                            model_id=group)
        state.forecasts[group] = fs
        rows.append(report_row(group, "pc", fs))
    state.oos_table = pd.DataFrame(rows)
    _write_csv(state, "oos.csv", state.oos_table)


def _decimal(values_percent, simple: bool):
    frac = np.asarray(values_percent, dtype=float) / 100.0
    return np.expm1(frac) if simple else frac


def _backtest_inputs(state: PipelineState):
    """Decimal premium/riskfree series and the trailing variance forecast
    aligned on the out-of-sample target months."""
    cfg = state.cfg
    simple = cfg.allocation.simple_returns
    start = state.oos_start_pos
    rfree = pd.Series(state.macro.column("Rfree"), index=state.macro.months)
    rf_frac = rfree.loc[state.targets].to_numpy()
    rf_dec = rf_frac if simple else np.log1p(rf_frac)
    prem_dec = _decimal(state.y, simple)
    rollvar = alloc_mod.rolling_variance(prem_dec + rf_dec,
                                         cfg.allocation.variance_window)
    # variance forecast for target position i comes from the window ending
    # at its origin, position i - 1
    var_fc = rollvar[start - 1: len(state.targets) - 1]
    if np.any(~np.isfinite(var_fc)):
        raise ValidationError(
            "variance window not filled by the first forecast month; "
            "move oos.start later or shrink allocate.variance_window")
    return state.targets[start:], prem_dec[start:], rf_dec[start:], var_fc


def _track_builder(state: PipelineState):
    fc_months, prem_oos, rf_oos, var_fc = _backtest_inputs(state)
    simple = state.cfg.allocation.simple_returns

    def track_for(forecast_percent, cost_cfg):
        w = alloc_mod.weights(_decimal(forecast_percent, simple), var_fc, cost_cfg)
        return alloc_mod.portfolio_returns(w, prem_oos, rf_oos, cost_cfg,
                                           months=fc_months)

    return track_for


def _holding_config(cfg: PipelineConfig) -> alloc_mod.AllocationConfig:
    """Allocation settings for the post-shock grid: always net of costs."""
    acfg = cfg.allocation
    return alloc_mod.AllocationConfig(
        kappa=acfg.kappa, weight_min=acfg.weight_min,
        weight_max=acfg.weight_max, variance_window=acfg.variance_window,
        cost_bps=cfg.holding_cost_bps, simple_returns=acfg.simple_returns)


def _stage_allocate(state: PipelineState):
    cfg = state.cfg
    acfg = cfg.allocation
    start = state.oos_start_pos
    track_for = _track_builder(state)
    any_fs = next(iter(state.forecasts.values()))
    ha_track = track_for(any_fs.ha, acfg)
    sliced_masks = {label: mask[start:] for label, mask in _mask_columns(state.masks_oos)}
    wanted = cfg.allocation_mask
    rows = []
    for name, group, _x in list(_predictor_columns(state)) + [(g, "pc", None) for g in PC_GROUPS]:
        fs = state.forecasts[name]
        track = track_for(fs.model, acfg)
        row = {"predictor": name, "group": group}
        if wanted in ("all", "entire"):
            row["cer_gain"] = alloc_mod.cer_gain(track, ha_track, acfg.kappa)
        for label, mask in sliced_masks.items():
            if wanted in ("all", label):
                row[f"cer_gain_{label}"] = alloc_mod.cer_gain(track, ha_track,
                                                              acfg.kappa, mask)
        rows.append(row)
    state.allocation_table = pd.DataFrame(rows)
    _write_csv(state, "allocation.csv", state.allocation_table)

    hold_cfg = _holding_config(cfg)
    ha_hold = track_for(any_fs.ha, hold_cfg)
    peaks, troughs = state.oos_shocks
    grids = []
    for group in PC_GROUPS:
        track = track_for(state.forecasts[group].model, hold_cfg)
        grid = alloc_mod.holding_period_grid(track, ha_hold, peaks, troughs,
                                             hold_cfg.kappa)
        grid.insert(0, "model", group)
        grids.append(grid)
    state.holding_table = pd.concat(grids, ignore_index=True)
    _write_csv(state, "holding_periods.csv", state.holding_table)


def _summary_row(name, values):
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    ac = np.nan
    if len(values) > 2 and np.std(values[:-1]) > 0 and np.std(values[1:]) > 0:
        ac = float(np.corrcoef(values[:-1], values[1:])[0, 1])
    return {"variable": name, "mean": values.mean(), "std": values.std(ddof=1),
            "min": values.min(), "max": values.max(), "autocorr": ac}


def _stage_report(state: PipelineState):
    cfg = state.cfg
    rows = [
        _summary_row("log_return_pct", 100.0 * state.returns.values),
        _summary_row("local_hurst", state.hurst_series.h),
        _summary_row("bullish_ratio", state.bullish.b),
        _summary_row("bullish_index", state.bullish.bu[1:]),
        _summary_row("log_equity_premium_pct", state.y),
    ]
    origins = state.targets - 1
    for name in predictors.MACRO_ORDER:
        rows.append(_summary_row(name, state.panel.macro[name].loc[origins]))
    _write_csv(state, "summary_stats.csv", pd.DataFrame(rows))

    hs = state.hurst_series
    _write_csv(state, "fig1_hurst.csv", pd.DataFrame({
        "date": hs.dates.strftime("%Y-%m-%d"), "h": hs.h}))
    _write_csv(state, "fig2_bullish.csv", pd.DataFrame({
        "month": state.bullish.months.astype(str), "bu": state.bullish.bu}))

    hold_cfg = _holding_config(cfg)
    track_for = _track_builder(state)
    any_fs = next(iter(state.forecasts.values()))
    ha_track = track_for(any_fs.ha, hold_cfg)
    peaks, troughs = state.oos_shocks
    parts = []
    for group in PC_GROUPS:
        gains = alloc_mod.cumulative_holding_gains(
            track_for(state.forecasts[group].model, hold_cfg), ha_track,
            peaks, troughs, hold_cfg.kappa)
        gains.insert(1, "model", group)
        parts.append(gains)
    fig3 = pd.concat(parts, ignore_index=True)[["holding", "model", "regime", "cer_gain"]]
    _write_csv(state, "fig3_cer_by_holding.csv", fig3)

    shading = pd.DataFrame(
        [{"start": str(s), "end": str(e)} for s, e in state.recessions.intervals])
    if shading.empty:
        shading = pd.DataFrame(columns=["start", "end"])
    _write_csv(state, "recession_shading.csv", shading)

    _write_manifest(state)


def _sha256(path):
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_manifest(state: PipelineState):
    cfg = state.cfg
    manifest = {
        "package_version": __version__,
        "kernel_backend": _kernels.BACKEND,
        "config_sha256": hashlib.sha256(cfg.source_text.encode()).hexdigest(),
        "seed": cfg.seed,
        "inputs": {
            "daily": _sha256(cfg.daily_path),
            "macro": _sha256(cfg.macro_path),
            "recessions": _sha256(cfg.recessions_path),
        },
        "versions": {
            "numpy": np.__version__,
            "pandas": pd.__version__,
        },
        "outputs": {name: _sha256(path) for name, path in sorted(state.written.items())},
        "notes": {
            "oos_shock_detection": "fixed threshold (causal); in-sample uses regime.mode",
        },
    }
    path = cfg.output_dir / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    state.written["manifest.json"] = path


_STAGE_FUNCS = {
    "ingest": _stage_ingest,
    "garch": _stage_garch,
    "hurst": _stage_hurst,
    "regime": _stage_regime,
    "predictors": _stage_predictors,
    "insample": _stage_insample,
    "oos": _stage_oos,
    "allocate": _stage_allocate,
    "report": _stage_report,
}


def run_pipeline(cfg: PipelineConfig, upto: str = "report") -> PipelineState:
    """Run stages through `upto` (inclusive), writing artifacts as they finish."""
    if upto not in STAGES:
        raise ValidationError(f"unknown stage {upto!r}; choose from {', '.join(STAGES)}")
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    state = PipelineState(cfg=cfg)
    last = STAGES.index(upto)
    for stage in STAGES[: last + 1]:
        try:
            _STAGE_FUNCS[stage](state)
        except BullhurstError as exc:
            raise StageError(stage, exc) from exc
        except (OSError, KeyError, ValueError) as exc:
            raise StageError(stage, exc) from exc
    return state
