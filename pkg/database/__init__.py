"""Database module."""
from database.db import get_db_session, get_session, init_database
from database.models import Base, RunRecord, IdentityCheck
