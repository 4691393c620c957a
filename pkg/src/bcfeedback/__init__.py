"""Feedback coding on the Gaussian broadcast channel with a common message.

Modules
-------
channel
    Channel model, seeded noise and transmission.
bounds
    Upper bound on linear-feedback rates and its closed-form envelope.
linfb
    Linear-feedback schemes and the private-message construction.
intermittent
    Intermittent-feedback retransmission protocol and its gamma model.
montecarlo
    Trial runner, Wilson intervals and parameter sweeps.
cli
    Command-line front end (``python -m bcfeedback``).
"""

from .bounds import (capacity, effective_noises, linfb_upper_bound,
                     prop2_envelope, private_outer_rates, solve_alpha_star)
from .channel import ChannelModel, NoiseBlock, make_channel, sample_noise, transmit
from .errors import (AccuracyError, CausalityError, ConfigError, SolverError,
                     ValidationError)
from .special import log_qfunc, qfunc

__version__ = '0.1.0'
