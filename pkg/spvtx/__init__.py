__version__ = '0.1.0'

from .mesh import *
from .atlas import *
from .planner import *
from .partition import *
from .tokenizer import *
from .metrics import *
from .exceptions import *
from .abstracts import Hashmap, Trace
from . import diagnostics
from . import formats
from . import nn
from . import plotting
