"""
Database models for the run archive.
Tables: runs, identity_checks
"""

from sqlalchemy import (
    Column, Integer, String, Boolean, DateTime, Float, ForeignKey, Index, JSON
)
from sqlalchemy.orm import declarative_base, relationship
from datetime import datetime

Base = declarative_base()


class RunRecord(Base):
    """One CLI invocation."""
    __tablename__ = 'runs'

    run_id = Column(Integer, primary_key=True, autoincrement=True)
    subcommand = Column(String(20), nullable=False)
    arguments = Column(JSON)
    matrix_dimension = Column(Integer)
    exit_code = Column(Integer, nullable=False, default=0)
    output_path = Column(String(255))
    started_at = Column(DateTime, default=datetime.utcnow)
    duration_seconds = Column(Float)

    checks = relationship("IdentityCheck", back_populates="run", cascade="all, delete-orphan")

    __table_args__ = (
        Index('ix_runs_started_at', 'started_at'),
    )

    def __repr__(self):
        return f"<RunRecord(run_id={self.run_id}, subcommand='{self.subcommand}', exit={self.exit_code})>"


class IdentityCheck(Base):
    """Per-case outcome of an identities run."""
    __tablename__ = 'identity_checks'

    check_id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('runs.run_id'), nullable=False, index=True)
    section = Column(String(40), nullable=False)
    case_label = Column(String(80), nullable=False)
    residual = Column(Float, nullable=False)
    passed = Column(Boolean, nullable=False)

    run = relationship("RunRecord", back_populates="checks")

    def __repr__(self):
        return f"<IdentityCheck(section='{self.section}', case='{self.case_label}', passed={self.passed})>"
