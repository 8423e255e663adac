"""Experiment runner and real-data front end behind the ``rkrank`` CLI."""

from .config import ExperimentConfig, TrackConfig, read_config_file
from .ranking import MatchRecord, RankingRow, build_observations, cmd_rank, parse_match_file, ranking_csv
from .simulate import ExperimentResult, TrialRow, cmd_simulate, draw_connected_graph, write_results
from .track import TrackResult, cmd_track

__all__ = [
    "ExperimentConfig",
    "TrackConfig",
    "read_config_file",
    "MatchRecord",
    "RankingRow",
    "build_observations",
    "cmd_rank",
    "parse_match_file",
    "ranking_csv",
    "ExperimentResult",
    "TrialRow",
    "cmd_simulate",
    "draw_connected_graph",
    "write_results",
    "TrackResult",
    "cmd_track",
]
