"""
Run ledger for the rainbow chain laboratory

Optional persistence of computed runs and run events through SQLAlchemy.
Nothing is written unless initialize_database() was called; log_run_event()
always reaches the logger.
"""

import datetime
import json
import logging
from typing import Any, Dict, List, Optional

from sqlalchemy import Column, DateTime, ForeignKey, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, relationship, scoped_session, sessionmaker

logger = logging.getLogger(__name__)

Base = declarative_base()

# Global session registry, None while no ledger is configured
_session = None
_engine = None


def _utcnow() -> datetime.datetime:
    return datetime.datetime.now(datetime.timezone.utc).replace(tzinfo=None)


class RunRecord(Base):
    """One invocation of a laboratory command with its inputs and outputs."""

    __tablename__ = "runs"

    id = Column(Integer, primary_key=True)
    command = Column(String(50), nullable=False)  # spectrum, entropy, sdrg, fit, predict, sweep
    parameters = Column(Text, nullable=True)  # JSON-encoded parameters
    results = Column(Text, nullable=False)  # JSON-encoded results
    status = Column(String(20), nullable=False, default="ok")
    created_at = Column(DateTime, default=_utcnow)

    events = relationship("RunEvent", back_populates="run")


class RunEvent(Base):
    """Event emitted while computing, optionally attached to a run."""

    __tablename__ = "run_events"

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=True)
    event_type = Column(String(50), nullable=False)
    description = Column(Text, nullable=False)
    event_metadata = Column(Text, nullable=True)  # JSON-encoded metadata
    timestamp = Column(DateTime, default=_utcnow)

    run = relationship("RunRecord", back_populates="events")


def initialize_database(url: str):
    """
    Initialize the run ledger with all tables

    Args:
        url: SQLAlchemy database URL, e.g. sqlite:///rainbow_runs.db

    Returns:
        scoped_session: The session registry used by this module
    """
    global _session, _engine

    close_database()
    _engine = create_engine(url)
    Base.metadata.create_all(_engine)
    _session = scoped_session(sessionmaker(bind=_engine))

    log_run_event(
        "DATABASE_INIT",
        "Run ledger initialized",
        metadata={"tables": [RunRecord.__tablename__, RunEvent.__tablename__]},
    )
    return _session


def close_database() -> None:
    """Drop the session registry and dispose of the engine."""
    global _session, _engine
    if _session is not None:
        _session.remove()
    if _engine is not None:
        _engine.dispose()
    _session = None
    _engine = None


def is_enabled() -> bool:
    return _session is not None


def log_run_event(event_type: str, description: str,
                  metadata: Optional[Dict[str, Any]] = None,
                  run_id: Optional[int] = None,
                  level: int = logging.INFO) -> Optional[RunEvent]:
    """
    Log a run event and persist it when the ledger is enabled

    Args:
        event_type: Event category (SPECTRUM, SDRG, FIT, ...)
        description: Description of the event
        metadata: Additional JSON-serialisable metadata
        run_id: Run the event belongs to
        level: Logging level for the log line

    Returns:
        RunEvent: The stored event, or None when nothing was persisted
    """
    logger.log(level, "[RUN_EVENT] %s: %s", event_type, description)

    if _session is None:
        return None

    try:
        event = RunEvent(
            run_id=run_id,
            event_type=event_type,
            description=description,
            event_metadata=json.dumps(metadata) if metadata else None,
        )
        _session.add(event)
        _session.commit()
        return event
    except Exception as e:
        # The ledger never aborts a computation
        _session.rollback()
        logger.error("Could not persist run event: %s", e)
        return None


def save_run(command: str, parameters: Dict[str, Any], results: Dict[str, Any],
             status: str = "ok") -> Optional[RunRecord]:
    """
    Save one command invocation

    Args:
        command: Command name
        parameters: Parameters used for the run
        results: Results of the run
        status: "ok" or "failed"

    Returns:
        RunRecord: The saved record, or None when the ledger is disabled
    """
    if _session is None:
        return None

    try:
        record = RunRecord(
            command=command,
            parameters=json.dumps(parameters),
            results=json.dumps(results),
            status=status,
        )
        _session.add(record)
        _session.commit()
    except Exception as e:
        _session.rollback()
        logger.error("Could not save run of %s: %s", command, e)
        return None

    log_run_event(
        command.upper(),
        f"Run of {command} saved",
        metadata={"run_id": record.id, "status": status},
        run_id=record.id,
    )
    return record


def get_runs(command: Optional[str] = None, limit: int = 100) -> List[Dict[str, Any]]:
    """
    Get recent runs, newest first

    Args:
        command: Filter by command name
        limit: Maximum number of runs to return

    Returns:
        List[Dict]: Runs as dictionaries with decoded JSON fields
    """
    if _session is None:
        return []

    query = _session.query(RunRecord)
    if command is not None:
        query = query.filter_by(command=command)
    runs = query.order_by(RunRecord.id.desc()).limit(limit).all()

    return [
        {
            "id": run.id,
            "command": run.command,
            "parameters": json.loads(run.parameters) if run.parameters else None,
            "results": json.loads(run.results),
            "status": run.status,
            "created_at": run.created_at.isoformat() if run.created_at else None,
        }
        for run in runs
    ]


def get_run_events(event_type: Optional[str] = None, limit: int = 100) -> List[Dict[str, Any]]:
    """
    Get recent run events, newest first

    Args:
        event_type: Filter by event type
        limit: Maximum number of events to return

    Returns:
        List[Dict]: Events as dictionaries
    """
    if _session is None:
        return []

    query = _session.query(RunEvent)
    if event_type is not None:
        query = query.filter_by(event_type=event_type)
    events = query.order_by(RunEvent.id.desc()).limit(limit).all()

    return [
        {
            "id": event.id,
            "run_id": event.run_id,
            "event_type": event.event_type,
            "description": event.description,
            "timestamp": event.timestamp.isoformat() if event.timestamp else None,
            "metadata": json.loads(event.event_metadata) if event.event_metadata else None,
        }
        for event in events
    ]
