"""Grid-world swarm simulator and evolution of minimal-surprise controllers."""

from ._core import (
    ConfigError,
    EvolutionConfig,
    Genome,
    MalformedGenome,
    Scenario,
    SimConfig,
    SnapshotError,
    World,
    classify_blocks,
    evaluate,
    evolve,
    load_genome,
    mix64,
    movement,
    parse_config,
    parse_scenario,
    parse_snapshot,
    post_evaluate,
    random_world,
    render,
    replay,
    run_experiment,
    save_genome,
    score_run,
    similarity,
    simulate_fitness,
    structure_report,
)

__all__ = [name for name in dir() if not name.startswith("_")]
