import functools
import logging

logger = logging.getLogger("mcid.actions")


def _describe(value) -> str:
    if isinstance(value, float):
        return f"{value:g}"
    text = str(value).replace("\n", " ").replace("'", '"')
    return text if len(text) <= 80 else text[:77] + "..."


def log_action(action: str, *, fields: tuple[str, ...] = (), verbose: bool = False):
    """Журналирует вызов: ACTION key=value ... result=OK|ERROR"""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            params = " ".join(f"{name}={_describe(kwargs[name])}" for name in fields if kwargs.get(name) is not None)
            if args:
                params = f"input={_describe(args[0])} {params}".strip()
            try:
                result = func(*args, **kwargs)
                msg = f"{action} {params} result=OK"
                if verbose and isinstance(result, dict):
                    summary = ", ".join(f"{k}={_describe(v)}" for k, v in result.items() if not isinstance(v, (list, dict)))
                    msg += f" verbose='{summary}'"
                logger.info(msg)
                return result
            except Exception as e:
                msg = (f"{action} {params} result=ERROR "
                       f"error_type={type(e).__name__} message='{str(e)}'")
                logger.error(msg)
                raise
        return wrapper
    return decorator
