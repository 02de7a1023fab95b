from sqlalchemy import Column, Integer, String, DateTime, Text, BigInteger
from sqlalchemy.sql import func
from app.database.database import Base


class Run(Base):
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    command = Column(String, nullable=False)  # "build-core", "surgery", "verify-fellow-traveling", ...
    policy = Column(String, nullable=True)
    seed = Column(BigInteger, nullable=True)
    status = Column(String, default="ok")  # "ok", "uncertified"
    area = Column(Integer, nullable=True)
    summary = Column(Text, nullable=False, default="{}")  # JSON отчёта
    created_at = Column(DateTime(timezone=True), server_default=func.now())
