from .query_likelihood import ql_score, ql_rank
from .interpolation import min_max_normalize, interpolate, interpolated_run, lambda_grid, tune_lambda
