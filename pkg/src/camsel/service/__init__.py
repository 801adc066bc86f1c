from camsel.service.app import create_app
from camsel.service.state import ServiceState

__all__ = ["ServiceState", "create_app"]
