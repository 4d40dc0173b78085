# __init__.py for the replay package

from .replay_buffer import Transition, TransitionBatch, ReplayBuffer, record_dtype, record_nbytes, load_dump
