from . import fs
from . import hashing
from . import read_file
from . import safe_run
