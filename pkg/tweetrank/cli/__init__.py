from .main import app
from . import data, evaluate, train
