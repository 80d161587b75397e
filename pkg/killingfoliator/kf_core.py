import logging
import os
import time

from killingfoliator.kf_config import config

"""
Run log and error types shared by all killingfoliator modules.

This file is part of killingfoliator.

"""

__license__ = 'MIT'


LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')
COLUMNS = ('level', 'timestamp', 'operation', 'subject', 'msg', 'msg_type')


class KFEngine(object):
    """
    Holds the run log. Every module reports through KFEngine.log; the first call opens a delimited log file
    in config['LOG_DIR'] whose first line names the columns.
    """
    log_file_name = ''
    logger = None

    @classmethod
    def setup_logging(cls, log_dir=None, log_name=None, header=None, names=COLUMNS, delimiter=";",
                      logger_name='KF_logger'):
        """
        (Re)attach the run log handler.
        :param log_dir: directory of the log file, default config['LOG_DIR']; None discards all records
        :type log_dir: str
        :param log_name: file name, default config['LOG_NAME'] or KF_run-<yyyymmdd_hhmm>.log
        :type log_name: str
        :param header: optional comment line written above the column names
        :type header: str
        :param names: column names of the records
        :param delimiter: column delimiter, matching format_msg
        """
        log_dir = config['LOG_DIR'] if log_dir is None else log_dir
        log_name = log_name or config['LOG_NAME'] or time.strftime('KF_run-%Y%m%d_%H%M.log')

        logger = logging.getLogger(logger_name)
        logger.setLevel(logging.DEBUG)
        logger.propagate = False
        for handler in logger.handlers[:]:
            logger.removeHandler(handler)
        cls.logger = logger

        if log_dir is None:
            logger.addHandler(logging.NullHandler())
            cls.log_file_name = ''
            return

        os.makedirs(log_dir, exist_ok=True)
        cls.log_file_name = os.path.join(log_dir, log_name)
        first_lines = [delimiter.join(names)]
        if header:
            first_lines.insert(0, header if header.startswith('#') else '#' + header)
        handler = logging.FileHandler(cls.log_file_name, mode='a')
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(FormatterWithHeader('\n'.join(first_lines),
                                                 fmt=delimiter.join(['%(levelname)s', '%(asctime)s', '%(message)s']),
                                                 datefmt='%m/%d/%Y %H:%M:%S'))
        logger.addHandler(handler)

    @classmethod
    def log(cls, level, message):
        """
        :param level: one of LEVELS
        :param message: a record built with format_msg
        """
        if level not in LEVELS:
            raise ValueError('Unknown log level {!r}'.format(level))
        if cls.logger is None:
            cls.setup_logging()
        cls.logger.log(getattr(logging, level), message)


def format_msg(operation, subject, msg, msg_type=None, delimiter=";"):
    """
    One run log record: operation;subject;msg;msg_type. Fields that contain the delimiter are double quoted,
    with any double quotes inside them turned into single quotes.
    :param operation: name of the operation, e.g. 'closure'
    :param subject: what it ran on, e.g. a scenario or family name
    :param msg: free text
    :param msg_type: optional type tag, usually an exception class name
    :return: str
    """
    def quote(v):
        if isinstance(v, str) and delimiter in v:
            return '"{}"'.format(v.replace('"', "'"))
        return v

    return delimiter.join(str(quote(v)) for v in (operation, subject, msg, msg_type))


class FoliationError(Exception):
    def __init__(self, value):
        """
        Base class for killingfoliator error handling
        :param value: description of what went wrong
        :type value: str
        """
        self.value = value

    def __str__(self):
        return repr(self.value)


class ExpressionSyntaxError(FoliationError):
    def __init__(self, value, offset):
        """
        Raised by the expression parser.
        :param value: what the parser expected or found
        :type value: str
        :param offset: byte offset into the expression text where parsing failed
        :type offset: int
        """
        self.offset = offset
        self.value = '{} (at offset {})'.format(value, offset)


class UnknownVariableError(FoliationError):
    pass


class EvaluationError(FoliationError):
    pass


class DimensionMismatchError(FoliationError, ValueError):
    pass


class NotKillingError(FoliationError):
    def __init__(self, value, report=None):
        self.value = value
        self.report = report


class NonAffineFieldError(FoliationError):
    pass


class NotOrthogonalAtAnchorError(FoliationError):
    def __init__(self, value, cosine):
        self.value = value
        self.cosine = cosine


class NotTangentError(FoliationError):
    def __init__(self, value, point, residual):
        """
        :param point: the worst-offending sample point
        :param residual: the tangency (or decomposition) residual at that point
        """
        self.value = value + ' Worst point: {}, residual: {}'.format(list(point), residual)
        self.point = point
        self.residual = residual


class OpenOrbitError(FoliationError):
    pass


class DegenerateFamilyError(FoliationError):
    pass


class UnclassifiableConfigurationError(FoliationError):
    pass


class UnknownScenarioError(FoliationError):
    pass


class ScenarioFileError(FoliationError):
    pass


class FormatterWithHeader(logging.Formatter):
    """Writes `header` once, in front of the first record that reaches the file"""

    def __init__(self, header, **kwargs):
        super(FormatterWithHeader, self).__init__(**kwargs)
        self.header = header
        self._pending = True

    def format(self, record):
        line = super(FormatterWithHeader, self).format(record)
        if self._pending:
            self._pending = False
            return self.header + '\n' + line
        return line
