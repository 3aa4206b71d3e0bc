// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/llm/chat.hpp>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

namespace openti::test
{

// Fresh directory under the system temp dir, removed at scope exit.
class TempDir
{
public:
    TempDir()
    {
        std::random_device rd;
        _path = std::filesystem::temp_directory_path() / ("openti_test_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return _path; }
    std::filesystem::path operator/(const std::string& rel) const { return _path / rel; }

private:
    std::filesystem::path _path;
};

// Counts calls through to another backend.
class CountingBackend final : public llm::LlmBackend
{
public:
    explicit CountingBackend(llm::BackendPtr inner)
        : _inner(std::move(inner))
    {
    }
    std::string name() const override { return "counting"; }
    int calls() const { return _calls.load(); }

private:
    llm::ChatResponse do_complete(const llm::ChatRequest& request) override
    {
        ++_calls;
        return _inner->complete(request);
    }
    llm::BackendPtr _inner;
    std::atomic<int> _calls {0};
};

inline std::filesystem::path data_dir()
{
    return OPENTI_TEST_DATA_DIR;
}

} // namespace openti::test
