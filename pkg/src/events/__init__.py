"""
Events module - strukturalny log biegu do formatu JSON.

Zawiera:
- RunEvent: Dataclass reprezentująca zdarzenie
- EventType: Enum typów zdarzeń
- EventLogger: Klasa logująca zdarzenia
"""

from .event_logger import RunEvent, EventType, EventLogger

__all__ = ["RunEvent", "EventType", "EventLogger"]
