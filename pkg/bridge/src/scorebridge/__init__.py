"""Standalone score-model server speaking the QSB1 wire protocol."""

from .framing import FrameError, encode, read_frame
from .models import CheckpointModel, EchoModel, load_model
from .server import BridgeServer, serve_stdio, serve_stream

__version__ = "0.1.0"
