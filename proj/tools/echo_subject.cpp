// Reference external subject speaking the line-delimited JSON protocol.
// Echoes each input datum back as the output. Flags make it misbehave on
// purpose so the runner's failure handling can be exercised:
//   --malformed-at N   write a non-JSON line instead of the Nth response
//   --crash-at N       exit before answering the Nth request
//   --sleep-at N       sleep --sleep-ms before answering the Nth request
//   --fail-num X       answer {"error": ...} whenever the input is {"num": X}

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

int main(int argc, char** argv) {
    long malformed_at = -1, crash_at = -1, sleep_at = -1, sleep_ms = 100;
    std::optional<double> fail_num;
    for (int i = 1; i < argc; ++i) {
        auto next = [&]() -> const char* {
            if (i + 1 >= argc) {
                std::cerr << argv[i] << " needs a value\n";
                std::exit(64);
            }
            return argv[++i];
        };
        if (!std::strcmp(argv[i], "--malformed-at")) malformed_at = std::atol(next());
        else if (!std::strcmp(argv[i], "--crash-at")) crash_at = std::atol(next());
        else if (!std::strcmp(argv[i], "--sleep-at")) sleep_at = std::atol(next());
        else if (!std::strcmp(argv[i], "--sleep-ms")) sleep_ms = std::atol(next());
        else if (!std::strcmp(argv[i], "--fail-num")) fail_num = std::atof(next());
        else {
            std::cerr << "unknown flag " << argv[i] << "\n";
            return 64;
        }
    }

    std::string line;
    long request_no = 0;
    while (std::getline(std::cin, line)) {
        ++request_no;
        nlohmann::json request;
        try {
            request = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            std::cout << R"({"id": "", "error": "bad request"})" << "\n" << std::flush;
            continue;
        }
        if (request_no == crash_at) return 1;
        if (request_no == sleep_at)
            std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
        if (request_no == malformed_at) {
            std::cout << "this line is not a protocol response\n" << std::flush;
            continue;
        }

        nlohmann::json response{{"id", request.value("id", "")}};
        const auto& input = request["input"];
        if (fail_num && input.is_object() && input.contains("num") &&
            input["num"].get<double>() == *fail_num) {
            response["error"] = "configured failure";
        } else {
            response["output"] = input;
        }
        std::cout << response.dump() << "\n" << std::flush;
    }
    return 0;
}
