"""Commands module."""
from commands.run_config import RunConfig, CommandResult, build_run_config
from commands.spectral import (
    run_eig, run_count, run_zeta2, run_figure1, run_semicircle, figure1_frame, semicircle_frame
)
from commands.graph import run_orbits, run_walk, run_anderson
from commands.verification import run_identities, run_history
