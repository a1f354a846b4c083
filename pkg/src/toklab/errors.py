class ToklabError(Exception):
    exit_code = 1


class ConfigError(ToklabError):
    exit_code = 2


class DataError(ToklabError, ValueError):
    exit_code = 3
