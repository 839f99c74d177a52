// Copyright (c) 2026 the mhaudit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mhaudit {

/// Base class for all toolkit errors.
class AuditError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fatal configuration problem (bad manifest, unresolvable paths).
class ConfigError : public AuditError {
public:
    using AuditError::AuditError;
};

class MalformedTaxonomyError : public AuditError {
public:
    using AuditError::AuditError;
};

class UnknownDataTypeError : public AuditError {
public:
    using AuditError::AuditError;
};

class UnreadableArtifactError : public AuditError {
public:
    using AuditError::AuditError;
};

class MalformedDexError : public AuditError {
public:
    using AuditError::AuditError;
};

class MalformedSignatureDbError : public AuditError {
public:
    using AuditError::AuditError;
};

class InvalidHostnameError : public AuditError {
public:
    using AuditError::AuditError;
};

class UnknownCaptureFormatError : public AuditError {
public:
    using AuditError::AuditError;
};

class EmptyPersonaError : public AuditError {
public:
    using AuditError::AuditError;
};

class MissingPolicyRuleError : public AuditError {
public:
    using AuditError::AuditError;
};

class EmptyCorpusError : public AuditError {
public:
    using AuditError::AuditError;
};

class InvalidPlanError : public AuditError {
public:
    using AuditError::AuditError;
};

class CorpusMismatchError : public AuditError {
public:
    using AuditError::AuditError;
};

class IoError : public AuditError {
public:
    using AuditError::AuditError;
};

} // namespace mhaudit
