#include "fsfm/audit_log.hpp"

#include <fstream>

#include "fsfm/error.hpp"

namespace fsfm {

AuditLog::AuditLog(AuditLog&& other) noexcept {
    std::lock_guard lock(other.mu_);
    path_ = std::move(other.path_);
    entries_ = std::move(other.entries_);
    flushed_ = other.flushed_;
}

AuditLog& AuditLog::operator=(AuditLog&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mu_, other.mu_);
        path_ = std::move(other.path_);
        entries_ = std::move(other.entries_);
        flushed_ = other.flushed_;
    }
    return *this;
}

void AuditLog::append(const ForgetDecision& decision) {
    std::lock_guard lock(mu_);
    entries_.push_back(decision);
}

void AuditLog::append(std::span<const ForgetDecision> decisions) {
    std::lock_guard lock(mu_);
    entries_.insert(entries_.end(), decisions.begin(), decisions.end());
}

void AuditLog::flush() {
    std::lock_guard lock(mu_);
    if (!path_) {
        flushed_ = entries_.size();
        return;
    }
    if (flushed_ == entries_.size()) return;
    std::ofstream out(*path_, std::ios::app);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open audit log " + path_->string());
    for (std::size_t i = flushed_; i < entries_.size(); ++i) out << to_json(entries_[i]).dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "write failed on audit log " + path_->string());
    flushed_ = entries_.size();
}

std::vector<ForgetDecision> AuditLog::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

std::size_t AuditLog::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

std::vector<ForgetDecision> AuditLog::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open audit log " + path.string());
    std::vector<ForgetDecision> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(decision_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedRecord, std::string("audit log: ") + e.what());
        }
    }
    return out;
}

}  // namespace fsfm
