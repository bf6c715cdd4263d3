from loguru import logger
import traceback as tb


class SafeRun:
    def __init__(self, name: str, raise_error: bool = True, verbose: int = 2) -> None:
        """
        Run a pipeline stage with error handling and logging, using the with statement.

        Example:
            In the example below, the stage is logged at start and completion, and
            any error is logged before being re-raised.
            ```
            with SafeRun(name="TRAINING"):
                trainer.fit(dataset)
            ```

        Parameters:
            name: Name of the stage, used for logging
            raise_error: Whether to raise an error, or to catch it and log it instead
            verbose: The level of verbosity
                0: Do not log anything
                1: Log only the error when one is caught
                2: Log headers and footers at the start and exit of the with statement.
        """
        self.name = name
        self.raise_error = raise_error
        self.verbose = verbose

    def __enter__(self):
        if self.verbose >= 2:
            logger.info(f"------------ {self.name} STARTED ------------")
        return self

    def __exit__(self, type, value, traceback):
        """
        Handle the error. Raise it if `self.raise_error==True`, otherwise swallow it
        and log the traceback if `self.verbose >= 1`.
        """
        if traceback is not None:
            if self.verbose >= 1:
                logger.error(f"------------ {self.name} ERROR: {value} ------------")
            if self.raise_error:
                return False
            if self.verbose >= 1:
                logger.debug("".join(tb.format_exception(type, value, traceback)))
            return True

        if self.verbose >= 2:
            logger.info(f"------------ {self.name} COMPLETED ------------")
        return True
