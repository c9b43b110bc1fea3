"""
Database engine configuration for the run archive.
The engine is created on first use so tests can point it at an in-memory database.
"""

import logging
import os
from contextlib import contextmanager

from sqlalchemy import create_engine, event
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from config import get_archive_url
from database.models import Base

logger = logging.getLogger(__name__)

_engine = None
_SessionLocal = None


def _set_sqlite_pragma(dbapi_connection, connection_record):
    """Enable WAL mode and foreign keys after each connection."""
    cursor = dbapi_connection.cursor()
    cursor.execute("PRAGMA journal_mode=WAL")
    cursor.execute("PRAGMA busy_timeout=5000")  # Wait 5s on lock
    cursor.execute("PRAGMA foreign_keys=ON")
    cursor.close()


def _make_engine(url: str):
    if url.startswith('sqlite:///') and ':memory:' not in url:
        os.makedirs(os.path.dirname(url[len('sqlite:///'):]) or '.', exist_ok=True)

    if ':memory:' in url or url == 'sqlite://':
        engine = create_engine(url, echo=False, connect_args={"check_same_thread": False},
                               poolclass=StaticPool)
    else:
        engine = create_engine(url, echo=False, connect_args={"check_same_thread": False})
    event.listen(engine, "connect", _set_sqlite_pragma)
    return engine


def init_database(url: str = None):
    """
    Create the engine for `url` (default: the archive under DATA_DIR) and all tables.
    Calling it again with a different URL rebinds the session factory.
    """
    global _engine, _SessionLocal

    url = url or get_archive_url()
    if _engine is not None:
        _engine.dispose()
    _engine = _make_engine(url)
    _SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=_engine)

    Base.metadata.create_all(bind=_engine)
    logger.debug("Run archive ready at %s", url)
    return _engine


def get_session():
    """Get a new database session (caller must close)."""
    if _SessionLocal is None:
        init_database()
    return _SessionLocal()


@contextmanager
def get_db_session():
    """Context manager for database sessions."""
    db = get_session()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()
