from fbesim import ScenarioSpec, SchemeKind, uniform_transmitters


def conv_spec(q=2, p0=0.99, frames=10_000, seed=11, period=1000, cot=900, **kw):
    return ScenarioSpec(
        scheme=SchemeKind.CONVENTIONAL,
        transmitters=uniform_transmitters(q, p0, k_max=0, **kw),
        base_period=period, cot=cot, horizon_frames=frames, seed=seed)


def multi_spec(q=2, p0=0.99, n=2, frames=10_000, seed=11, period=1000, cot=900):
    return ScenarioSpec(
        scheme=SchemeKind.MULTI_CONFIG,
        transmitters=uniform_transmitters(q, p0, k_max=0, n_configs=n),
        base_period=period, cot=cot, horizon_frames=frames, seed=seed)


def priority_spec(q=3, p0=0.99, frames=10_000, seed=11, step=40, cot=650):
    return ScenarioSpec(
        scheme=SchemeKind.PRIORITY_ARRANGED,
        transmitters=uniform_transmitters(q, p0, k_max=0),
        base_period=1000, cot=cot, priority_offset_step=step,
        horizon_frames=frames, seed=seed)


def idle_reduction_spec(q=2, p0=0.99, frames=10_000, seed=11, cot=900):
    return ScenarioSpec(
        scheme=SchemeKind.IDLE_REDUCTION,
        transmitters=uniform_transmitters(q, p0, k_max=None, latency_budget=1000),
        base_period=1000, cot=cot, horizon_frames=frames, seed=seed)

